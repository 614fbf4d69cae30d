//! Activity-based bound tightening on the MILP rows.

use crate::milp::{MilpInstance, Sense};

const MAX_PASSES: usize = 8;

/// Row-wise view of the constraint matrix used for propagation.
#[derive(Debug, Clone)]
pub(crate) struct Propagator {
    rows: Vec<(Vec<(usize, f64)>, f64, f64)>,
    /// Rows touching each column.
    col_rows: Vec<Vec<usize>>,
    is_binary: Vec<bool>,
}

impl Propagator {
    pub fn new(milp: &MilpInstance) -> Self {
        let mut col_rows = vec![Vec::new(); milp.num_cols];
        let rows = milp
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                for &(j, _) in &r.terms {
                    col_rows[j].push(i);
                }
                let (lo, hi) = match r.sense {
                    Sense::Le => (f64::NEG_INFINITY, r.rhs),
                    Sense::Ge => (r.rhs, f64::INFINITY),
                    Sense::Eq => (r.rhs, r.rhs),
                };
                (r.terms.clone(), lo, hi)
            })
            .collect();
        Propagator {
            rows,
            col_rows,
            is_binary: milp.is_binary.clone(),
        }
    }

    /// Tightens `lo`/`hi` in place. Returns false when some row or column
    /// becomes empty. `seeds` lists the columns whose bounds just changed;
    /// `None` scans every row.
    pub fn run(&self, lo: &mut [f64], hi: &mut [f64], seeds: Option<&[usize]>) -> bool {
        let m = self.rows.len();
        let mut queued = vec![false; m];
        let mut queue: Vec<usize> = match seeds {
            Some(cols) => {
                let mut q = Vec::new();
                for &c in cols {
                    for &r in &self.col_rows[c] {
                        if !queued[r] {
                            queued[r] = true;
                            q.push(r);
                        }
                    }
                }
                q
            }
            None => {
                queued.iter_mut().for_each(|q| *q = true);
                (0..m).collect()
            }
        };
        let mut pass = 0;
        while !queue.is_empty() && pass < MAX_PASSES {
            pass += 1;
            let mut next = Vec::new();
            for &r in &queue {
                queued[r] = false;
            }
            for r in queue {
                let Some(changed) = self.tighten_row(r, lo, hi) else {
                    return false;
                };
                for c in changed {
                    for &rr in &self.col_rows[c] {
                        if !queued[rr] {
                            queued[rr] = true;
                            next.push(rr);
                        }
                    }
                }
            }
            queue = next;
        }
        true
    }

    fn tighten_row(&self, r: usize, lo: &mut [f64], hi: &mut [f64]) -> Option<Vec<usize>> {
        let (terms, row_lo, row_hi) = &self.rows[r];
        // Activity range with infinite contributions counted separately.
        let (mut min_act, mut max_act) = (0.0, 0.0);
        let (mut min_inf, mut max_inf) = (0usize, 0usize);
        for &(j, a) in terms {
            let (lmin, lmax) = if a > 0.0 { (lo[j], hi[j]) } else { (hi[j], lo[j]) };
            if lmin.is_finite() {
                min_act += a * lmin;
            } else {
                min_inf += 1;
            }
            if lmax.is_finite() {
                max_act += a * lmax;
            } else {
                max_inf += 1;
            }
        }
        let scale = 1e-9 * (1.0 + row_lo.abs().min(row_hi.abs()).min(1e6));
        if min_inf == 0 && min_act > row_hi + scale.max(1e-7) {
            return None;
        }
        if max_inf == 0 && max_act < row_lo - scale.max(1e-7) {
            return None;
        }
        let mut changed = Vec::new();
        for &(j, a) in terms {
            // Residual activity of the other terms.
            let (lmin, lmax) = if a > 0.0 { (lo[j], hi[j]) } else { (hi[j], lo[j]) };
            let rest_min = if lmin.is_finite() {
                (min_inf == 0).then(|| min_act - a * lmin)
            } else {
                (min_inf == 1).then_some(min_act)
            };
            let rest_max = if lmax.is_finite() {
                (max_inf == 0).then(|| max_act - a * lmax)
            } else {
                (max_inf == 1).then_some(max_act)
            };
            let mut new_lo = lo[j];
            let mut new_hi = hi[j];
            if row_hi.is_finite() {
                if let Some(rm) = rest_min {
                    let bound = (row_hi - rm) / a;
                    if a > 0.0 {
                        new_hi = new_hi.min(bound);
                    } else {
                        new_lo = new_lo.max(bound);
                    }
                }
            }
            if row_lo.is_finite() {
                if let Some(rm) = rest_max {
                    let bound = (row_lo - rm) / a;
                    if a > 0.0 {
                        new_lo = new_lo.max(bound);
                    } else {
                        new_hi = new_hi.min(bound);
                    }
                }
            }
            if self.is_binary[j] {
                new_lo = (new_lo - 1e-6).ceil().max(lo[j]);
                new_hi = (new_hi + 1e-6).floor().min(hi[j]);
            } else {
                let slack = 1e-9 * (1.0 + new_lo.abs().max(new_hi.abs()).min(1e6));
                new_lo -= slack;
                new_hi += slack;
                let width = (hi[j] - lo[j]).min(1e6);
                let min_gain = 1e-6 * (1.0 + width);
                if !(new_lo > lo[j] + min_gain) {
                    new_lo = lo[j];
                }
                if !(new_hi < hi[j] - min_gain) {
                    new_hi = hi[j];
                }
            }
            if new_lo > new_hi {
                if new_lo - new_hi > 1e-7 * (1.0 + new_lo.abs()) {
                    return None;
                }
                let mid = 0.5 * (new_lo + new_hi);
                new_lo = mid;
                new_hi = mid;
            }
            if new_lo != lo[j] || new_hi != hi[j] {
                // Keep activities consistent for the remaining terms.
                let (old_min, old_max) = if a > 0.0 { (lo[j], hi[j]) } else { (hi[j], lo[j]) };
                let (nmin, nmax) = if a > 0.0 { (new_lo, new_hi) } else { (new_hi, new_lo) };
                if old_min.is_finite() {
                    min_act += a * (nmin - old_min);
                } else if nmin.is_finite() {
                    min_inf -= 1;
                    min_act += a * nmin;
                }
                if old_max.is_finite() {
                    max_act += a * (nmax - old_max);
                } else if nmax.is_finite() {
                    max_inf -= 1;
                    max_act += a * nmax;
                }
                lo[j] = new_lo;
                hi[j] = new_hi;
                changed.push(j);
            }
        }
        Some(changed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::build_piecewise;
    use crate::milp::build_milp;
    use crate::model::{toy_unit, SystemInstance};

    #[test]
    fn fixing_a_segment_pins_power_range() {
        let inst = SystemInstance::new(vec![toy_unit()], vec![37.0], vec![], 1).unwrap();
        let pwc = build_piecewise(&inst.units[0], 2).unwrap();
        let milp = build_milp(&inst, &[pwc]).unwrap();
        let prop = Propagator::new(&milp);
        let mut lo = milp.lower.clone();
        let mut hi = milp.upper.clone();
        assert!(prop.run(&mut lo, &mut hi, None));
        // Balance pins P = 37.
        let g = &milp.groups[0];
        assert!((lo[g.power_col] - 37.0).abs() < 1e-6 && (hi[g.power_col] - 37.0).abs() < 1e-6);

        // Forcing segment 4 ([50, 60]) contradicts P = 37.
        let mut lo2 = milp.lower.clone();
        let mut hi2 = milp.upper.clone();
        lo2[g.binary_cols[3]] = 1.0;
        assert!(!prop.run(&mut lo2, &mut hi2, None));

        // Forcing segment 2 fixes the other binaries to zero.
        let mut lo3 = milp.lower.clone();
        let mut hi3 = milp.upper.clone();
        lo3[g.binary_cols[1]] = 1.0;
        assert!(prop.run(&mut lo3, &mut hi3, Some(&[g.binary_cols[1]])));
        for (l, &b) in g.binary_cols.iter().enumerate() {
            if l != 1 {
                assert_eq!(hi3[b], 0.0);
            }
        }
    }
}
