//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Slow and simple on purpose: it only has to classify small LPs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use ded_core::milp::{MilpInstance, Sense};

#[derive(Debug, Clone, PartialEq)]
pub enum ExactOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

type Q = BigRational;

fn q(v: f64) -> Q {
    Q::from_float(v).expect("finite data")
}

/// How an original column is expressed through nonnegative variables.
enum Map {
    /// x = lo + y
    Shift { y: usize, lo: Q },
    /// x = hi - y
    Flip { y: usize, hi: Q },
    /// x = y+ - y-
    Free { pos: usize, neg: usize },
}

pub fn solve_exact(lp: &MilpInstance) -> ExactOutcome {
    let mut maps = Vec::with_capacity(lp.num_cols);
    let mut nvars = 0usize;
    // Rows as (coefficients over y, sense, rhs) before slacks.
    let mut rows: Vec<(Vec<(usize, Q)>, Sense, Q)> = Vec::new();
    for j in 0..lp.num_cols {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo.is_finite() {
            maps.push(Map::Shift { y: nvars, lo: q(lo) });
            if hi.is_finite() {
                rows.push((vec![(nvars, Q::one())], Sense::Le, q(hi) - q(lo)));
            }
            nvars += 1;
        } else if hi.is_finite() {
            maps.push(Map::Flip { y: nvars, hi: q(hi) });
            nvars += 1;
        } else {
            maps.push(Map::Free { pos: nvars, neg: nvars + 1 });
            nvars += 2;
        }
    }
    let mut cost = vec![Q::zero(); nvars];
    let mut cost_const = Q::zero();
    for j in 0..lp.num_cols {
        let c = q(lp.objective[j]);
        match &maps[j] {
            Map::Shift { y, lo } => {
                cost[*y] += &c;
                cost_const += &c * lo;
            }
            Map::Flip { y, hi } => {
                cost[*y] -= &c;
                cost_const += &c * hi;
            }
            Map::Free { pos, neg } => {
                cost[*pos] += &c;
                cost[*neg] -= &c;
            }
        }
    }
    for r in &lp.rows {
        let mut coef = Vec::new();
        let mut rhs = q(r.rhs);
        for &(j, a) in &r.terms {
            let a = q(a);
            match &maps[j] {
                Map::Shift { y, lo } => {
                    rhs -= &a * lo;
                    coef.push((*y, a));
                }
                Map::Flip { y, hi } => {
                    rhs -= &a * hi;
                    coef.push((*y, -a));
                }
                Map::Free { pos, neg } => {
                    coef.push((*pos, a.clone()));
                    coef.push((*neg, -a));
                }
            }
        }
        rows.push((coef, r.sense, rhs));
    }

    // Standard form A z = b, z >= 0, b >= 0: y, then slacks, then artificials.
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_struct = nvars + n_slack;
    let width = n_struct + m;
    let mut tab = vec![vec![Q::zero(); width + 1]; m];
    let mut slack = nvars;
    for (i, (coef, sense, rhs)) in rows.iter().enumerate() {
        for (y, a) in coef {
            tab[i][*y] += a;
        }
        match sense {
            Sense::Le => {
                tab[i][slack] = Q::one();
                slack += 1;
            }
            Sense::Ge => {
                tab[i][slack] = -Q::one();
                slack += 1;
            }
            Sense::Eq => {}
        }
        tab[i][width] = rhs.clone();
        if rhs.is_negative() {
            for v in tab[i].iter_mut() {
                *v = -v.clone();
            }
        }
        tab[i][n_struct + i] = Q::one();
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n_struct + i).collect();

    // Phase 1: minimize the sum of artificials.
    let mut c1 = vec![Q::zero(); width];
    for c in c1.iter_mut().skip(n_struct) {
        *c = Q::one();
    }
    if !run(&mut tab, &mut basis, &c1, width, width) {
        unreachable!("phase 1 is bounded");
    }
    let infeas: Q = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n_struct)
        .map(|(i, _)| tab[i][width].clone())
        .sum();
    if infeas.is_positive() {
        return ExactOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n_struct {
            if let Some(j) = (0..n_struct).find(|&j| !tab[i][j].is_zero()) {
                pivot(&mut tab, &mut basis, i, j);
            }
        }
    }
    // Phase 2 over structural columns only.
    let mut c2 = vec![Q::zero(); width];
    c2[..nvars].clone_from_slice(&cost);
    if !run(&mut tab, &mut basis, &c2, n_struct, width) {
        return ExactOutcome::Unbounded;
    }
    let mut obj = cost_const;
    for (i, &b) in basis.iter().enumerate() {
        obj += &c2[b] * &tab[i][width];
    }
    ExactOutcome::Optimal(obj.to_f64().unwrap_or(f64::NAN))
}

fn pivot(tab: &mut [Vec<Q>], basis: &mut [usize], r: usize, c: usize) {
    let p = tab[r][c].clone();
    for v in tab[r].iter_mut() {
        *v = &*v / &p;
    }
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, pv) in row.iter_mut().zip(&pivot_row) {
            *v -= &f * pv;
        }
    }
    basis[r] = c;
}

/// Bland's-rule primal simplex; columns at or beyond `allowed` never enter.
/// Returns false when unbounded.
fn run(tab: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: usize, width: usize) -> bool {
    let m = tab.len();
    loop {
        let mut enter = None;
        for j in 0..allowed {
            if basis.contains(&j) {
                continue;
            }
            let mut d = cost[j].clone();
            for i in 0..m {
                d -= &cost[basis[i]] * &tab[i][j];
            }
            if d.is_negative() {
                enter = Some(j);
                break;
            }
        }
        let Some(j) = enter else { return true };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if tab[i][j].is_positive() {
                let ratio = &tab[i][width] / &tab[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else { return false };
        pivot(tab, basis, r, j);
    }
}

#[allow(unused)]
fn _int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}
