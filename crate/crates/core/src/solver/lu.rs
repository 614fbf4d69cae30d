//! Sparse LU factorization of simplex bases with product-form updates.
//!
//! Columns are factored left-looking in order of increasing nonzero count;
//! the pivot in each column is the entry of largest magnitude, with ties
//! within a 10x threshold broken toward rows with fewer nonzeros.

/// Absolute size below which a pivot candidate is treated as zero.
const PIVOT_ZERO: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Default)]
pub(crate) struct LuFactors {
    m: usize,
    /// Pivot row of elimination step `k`.
    pivot_row: Vec<usize>,
    /// Basis slot factored at step `k`.
    slot_at: Vec<usize>,
    /// Multipliers `(row, l)` of step `k`.
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Above-diagonal entries `(step j < k, u)` of step `k`.
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
}

#[derive(Debug, Clone)]
struct Eta {
    slot: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

/// Outcome of a factorization attempt.
pub(crate) struct Factored {
    pub lu: LuFactors,
    /// Slots whose columns were dependent, each paired with the row whose
    /// logical variable should replace it.
    pub replaced: Vec<(usize, usize)>,
}

impl LuFactors {
    /// Factors the basis whose slot `s` holds column `cols[s]`.
    ///
    /// Dependent columns are swapped for the logical (`-e_r`) of an unpivoted
    /// row; the swaps are reported so the caller can update its basis.
    pub fn factor(m: usize, cols: &[Vec<(usize, f64)>]) -> Factored {
        debug_assert_eq!(cols.len(), m);
        let mut row_count = vec![0usize; m];
        for c in cols {
            for &(r, _) in c {
                row_count[r] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&s| (cols[s].len(), s));

        let mut lu = LuFactors {
            m,
            pivot_row: Vec::with_capacity(m),
            slot_at: Vec::with_capacity(m),
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
        };
        let mut step_of_row: Vec<Option<usize>> = vec![None; m];
        let mut work = vec![0.0f64; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut is_touched = vec![false; m];
        let mut singular = Vec::new();

        for &slot in &order {
            for &(r, v) in &cols[slot] {
                work[r] += v;
                if !is_touched[r] {
                    is_touched[r] = true;
                    touched.push(r);
                }
            }
            // Forward substitution with the multipliers found so far.
            for k in 0..lu.pivot_row.len() {
                let v = work[lu.pivot_row[k]];
                if v == 0.0 {
                    continue;
                }
                for &(r, l) in &lu.l_cols[k] {
                    work[r] -= l * v;
                    if !is_touched[r] {
                        is_touched[r] = true;
                        touched.push(r);
                    }
                }
            }
            let mut best_abs = 0.0f64;
            for &r in &touched {
                if step_of_row[r].is_none() {
                    best_abs = best_abs.max(work[r].abs());
                }
            }
            if best_abs <= PIVOT_ZERO {
                singular.push(slot);
            } else {
                let mut pivot = usize::MAX;
                for &r in &touched {
                    if step_of_row[r].is_none() && work[r].abs() >= 0.1 * best_abs {
                        let better = pivot == usize::MAX
                            || row_count[r] < row_count[pivot]
                            || (row_count[r] == row_count[pivot] && work[r].abs() > work[pivot].abs());
                        if better {
                            pivot = r;
                        }
                    }
                }
                let d = work[pivot];
                let k = lu.pivot_row.len();
                let mut ucol = Vec::new();
                let mut lcol = Vec::new();
                for &r in &touched {
                    let v = work[r];
                    if r == pivot || v.abs() <= DROP_TOL {
                        continue;
                    }
                    match step_of_row[r] {
                        Some(j) => ucol.push((j, v)),
                        None => lcol.push((r, v / d)),
                    }
                }
                step_of_row[pivot] = Some(k);
                lu.pivot_row.push(pivot);
                lu.slot_at.push(slot);
                lu.l_cols.push(lcol);
                lu.u_cols.push(ucol);
                lu.u_diag.push(d);
            }
            for &r in &touched {
                work[r] = 0.0;
                is_touched[r] = false;
            }
            touched.clear();
        }

        let mut replaced = Vec::with_capacity(singular.len());
        if !singular.is_empty() {
            let free_rows: Vec<usize> = (0..m).filter(|&r| step_of_row[r].is_none()).collect();
            debug_assert_eq!(free_rows.len(), singular.len());
            for (&slot, &r) in singular.iter().zip(&free_rows) {
                // -e_r: no multiplier touches an unpivoted row's own entry.
                step_of_row[r] = Some(lu.pivot_row.len());
                lu.pivot_row.push(r);
                lu.slot_at.push(slot);
                lu.l_cols.push(Vec::new());
                lu.u_cols.push(Vec::new());
                lu.u_diag.push(-1.0);
                replaced.push((slot, r));
            }
        }
        Factored { lu, replaced }
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = rhs` in place; `rhs` is indexed by row on entry and by
    /// basis slot on exit.
    pub fn ftran(&self, rhs: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let v = rhs[self.pivot_row[k]];
            if v == 0.0 {
                continue;
            }
            for &(r, l) in &self.l_cols[k] {
                rhs[r] -= l * v;
            }
        }
        let mut z = vec![0.0; m];
        for k in (0..m).rev() {
            let v = rhs[self.pivot_row[k]];
            if v == 0.0 {
                continue;
            }
            let zk = v / self.u_diag[k];
            z[k] = zk;
            for &(j, u) in &self.u_cols[k] {
                rhs[self.pivot_row[j]] -= u * zk;
            }
        }
        for k in 0..m {
            rhs[self.slot_at[k]] = z[k];
        }
        for eta in &self.etas {
            let xr = rhs[eta.slot] / eta.pivot;
            if xr != 0.0 {
                for &(i, a) in &eta.entries {
                    rhs[i] -= a * xr;
                }
            }
            rhs[eta.slot] = xr;
        }
    }

    /// Solves `y^T B = c^T` in place; `c` is indexed by basis slot on entry
    /// and by row on exit.
    pub fn btran(&self, c: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.slot];
            for &(i, a) in &eta.entries {
                v -= a * c[i];
            }
            c[eta.slot] = v / eta.pivot;
        }
        let mut z = vec![0.0; m];
        for k in 0..m {
            let mut v = c[self.slot_at[k]];
            for &(j, u) in &self.u_cols[k] {
                v -= u * z[j];
            }
            z[k] = v / self.u_diag[k];
        }
        // Multiplier rows of step k are pivot rows of later steps, so every
        // c[r] read here has already been overwritten with its y value.
        for k in (0..m).rev() {
            let mut v = z[k];
            for &(r, l) in &self.l_cols[k] {
                v -= l * c[r];
            }
            c[self.pivot_row[k]] = v;
        }
    }

    /// Records that slot `slot` now holds a column whose FTRAN image is `alpha`.
    pub fn push_eta(&mut self, slot: usize, alpha: &[f64]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != slot && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            slot,
            pivot: alpha[slot],
            entries,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(m: usize, cols: &[Vec<(usize, f64)>], x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (s, c) in cols.iter().enumerate() {
            for &(r, v) in c {
                out[r] += v * x[s];
            }
        }
        out
    }

    fn sample_basis() -> Vec<Vec<(usize, f64)>> {
        vec![
            vec![(0, 2.0), (2, 1.0)],
            vec![(1, -1.0)],
            vec![(0, 1.0), (1, 3.0), (3, 4.0)],
            vec![(2, 5.0), (3, 1.0)],
        ]
    }

    #[test]
    fn ftran_btran_solve_the_basis() {
        let cols = sample_basis();
        let f = LuFactors::factor(4, &cols);
        assert!(f.replaced.is_empty());
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let mut rhs = dense_mul(4, &cols, &x_true);
        f.lu.ftran(&mut rhs);
        for (a, b) in rhs.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-12);
        }
        // y^T B = c^T  <=>  for each slot s: y . col_s = c_s
        let c = [1.0, 2.0, -1.0, 0.25];
        let mut y = c.to_vec();
        f.lu.btran(&mut y);
        for (s, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(r, v)| v * y[r]).sum();
            assert!((dot - c[s]).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let mut cols = sample_basis();
        let mut f = LuFactors::factor(4, &cols).lu;
        let new_col = vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)];
        let mut alpha = vec![0.0; 4];
        for &(r, v) in &new_col {
            alpha[r] = v;
        }
        f.ftran(&mut alpha);
        f.push_eta(1, &alpha);
        cols[1] = new_col;
        let x_true = [0.5, 1.5, -1.0, 2.0];
        let mut rhs = dense_mul(4, &cols, &x_true);
        f.ftran(&mut rhs);
        for (a, b) in rhs.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = [3.0, -1.0, 0.0, 1.0];
        let mut y = c.to_vec();
        f.btran(&mut y);
        for (s, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(r, v)| v * y[r]).sum();
            assert!((dot - c[s]).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_columns_are_replaced_by_logicals() {
        let cols = vec![
            vec![(0, 1.0), (1, 1.0)],
            vec![(0, 2.0), (1, 2.0)],
            vec![(2, 1.0)],
        ];
        let f = LuFactors::factor(3, &cols);
        assert_eq!(f.replaced.len(), 1);
        let (slot, row) = f.replaced[0];
        let mut fixed = cols.clone();
        fixed[slot] = vec![(row, -1.0)];
        let x_true = [1.0, 2.0, 3.0];
        let mut rhs = dense_mul(3, &fixed, &x_true);
        f.lu.ftran(&mut rhs);
        for (a, b) in rhs.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
