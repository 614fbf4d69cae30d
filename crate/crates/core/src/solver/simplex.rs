//! Bounded-variable revised simplex.
//!
//! Every row gets a logical variable `r_i = a_i x` bounded by the row's
//! sense and right-hand side, so the working system is `A x - r = 0` with
//! only box constraints on the `n + m` variables. The primal method runs a
//! composite phase 1 (sum of bound violations) and switches to Bland's rule
//! after a run of degenerate pivots; the dual method re-optimizes a warm
//! basis after bound changes.

use super::lu::LuFactors;
use crate::milp::{MilpInstance, Sense};

const REFACTOR_EVERY: usize = 80;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarStatus {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

/// Column data shared by every LP solved over one model.
#[derive(Debug, Clone)]
pub(crate) struct LpModel {
    pub n: usize,
    pub m: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
}

impl LpModel {
    pub fn from_milp(milp: &MilpInstance) -> Self {
        let n = milp.num_cols;
        let m = milp.rows.len();
        let mut cols = vec![Vec::new(); n];
        let mut row_lo = Vec::with_capacity(m);
        let mut row_hi = Vec::with_capacity(m);
        for (i, row) in milp.rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            row_lo.push(lo);
            row_hi.push(hi);
        }
        LpModel {
            n,
            m,
            cols,
            cost: milp.objective.clone(),
            row_lo,
            row_hi,
        }
    }

    /// Full variable bounds (structural then logical) for column bounds `lo`/`hi`.
    pub fn bounds(&self, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut l = lo.to_vec();
        let mut u = hi.to_vec();
        l.extend_from_slice(&self.row_lo);
        u.extend_from_slice(&self.row_hi);
        (l, u)
    }
}

/// A simplex basis that can seed a later solve.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Basis {
    pub basic: Vec<usize>,
    pub status: Vec<VarStatus>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub status: LpStatus,
    /// Structural column values.
    pub x: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    /// Dual simplex stopped because the objective passed the cutoff.
    pub cutoff: bool,
}

pub(crate) struct Simplex<'a> {
    model: &'a LpModel,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    basic: Vec<usize>,
    lu: LuFactors,
    feas_tol: f64,
    dual_tol: f64,
    pub iterations: usize,
    iteration_limit: usize,
}

fn snap(lo: f64, hi: f64) -> (VarStatus, f64) {
    if lo.is_finite() {
        (VarStatus::Lower, lo)
    } else if hi.is_finite() {
        (VarStatus::Upper, hi)
    } else {
        (VarStatus::Zero, 0.0)
    }
}

impl<'a> Simplex<'a> {
    /// Sets up a solve with full variable bounds `lo`/`hi` (length `n + m`).
    pub fn new(model: &'a LpModel, lo: Vec<f64>, hi: Vec<f64>, warm: Option<&Basis>) -> Self {
        let total = model.n + model.m;
        debug_assert_eq!(lo.len(), total);
        let (basic, mut status) = match warm {
            Some(b) if b.basic.len() == model.m && b.status.len() == total => {
                (b.basic.clone(), b.status.clone())
            }
            _ => {
                let mut status = vec![VarStatus::Lower; total];
                for j in model.n..total {
                    status[j] = VarStatus::Basic;
                }
                ((model.n..total).collect(), status)
            }
        };
        let mut x = vec![0.0; total];
        for j in 0..total {
            if status[j] == VarStatus::Basic {
                continue;
            }
            let (s, v) = match status[j] {
                VarStatus::Lower if lo[j].is_finite() => (VarStatus::Lower, lo[j]),
                VarStatus::Upper if hi[j].is_finite() => (VarStatus::Upper, hi[j]),
                VarStatus::Zero if !lo[j].is_finite() && !hi[j].is_finite() => (VarStatus::Zero, 0.0),
                _ => snap(lo[j], hi[j]),
            };
            status[j] = s;
            x[j] = v;
        }
        let scale = lo
            .iter()
            .chain(&hi)
            .filter(|v| v.is_finite())
            .fold(1.0f64, |acc, v| acc.max(v.abs()));
        let mut s = Simplex {
            model,
            lo,
            hi,
            x,
            status,
            basic,
            lu: LuFactors::default(),
            feas_tol: 1e-9 * scale.min(1e4),
            dual_tol: 1e-9,
            iterations: 0,
            iteration_limit: 50_000 + 50 * total,
        };
        s.refactor();
        s
    }

    pub fn basis(&self) -> Basis {
        Basis {
            basic: self.basic.clone(),
            status: self.status.clone(),
        }
    }

    fn column_into(&self, j: usize, dense: &mut [f64]) {
        if j < self.model.n {
            for &(r, a) in &self.model.cols[j] {
                dense[r] = a;
            }
        } else {
            dense[j - self.model.n] = -1.0;
        }
    }

    fn dot_col(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.model.n {
            self.model.cols[j].iter().map(|&(r, a)| a * y[r]).sum()
        } else {
            -y[j - self.model.n]
        }
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.model.n {
            self.model.cost[j]
        } else {
            0.0
        }
    }

    fn refactor(&mut self) {
        let cols: Vec<Vec<(usize, f64)>> = self
            .basic
            .iter()
            .map(|&j| {
                if j < self.model.n {
                    self.model.cols[j].clone()
                } else {
                    vec![(j - self.model.n, -1.0)]
                }
            })
            .collect();
        let factored = LuFactors::factor(self.model.m, &cols);
        for &(slot, row) in &factored.replaced {
            let out = self.basic[slot];
            let (lo, hi) = (self.lo[out], self.hi[out]);
            let v = self.x[out];
            let (s, val) = if lo.is_finite() && (!hi.is_finite() || (v - lo).abs() <= (v - hi).abs()) {
                (VarStatus::Lower, lo)
            } else if hi.is_finite() {
                (VarStatus::Upper, hi)
            } else {
                (VarStatus::Zero, 0.0)
            };
            self.status[out] = s;
            self.x[out] = val;
            let incoming = self.model.n + row;
            self.basic[slot] = incoming;
            self.status[incoming] = VarStatus::Basic;
        }
        self.lu = factored.lu;
        self.recompute_basic();
    }

    fn recompute_basic(&mut self) {
        let m = self.model.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.model.n + m {
            if self.status[j] == VarStatus::Basic || self.x[j] == 0.0 {
                continue;
            }
            let v = self.x[j];
            if j < self.model.n {
                for &(r, a) in &self.model.cols[j] {
                    rhs[r] -= a * v;
                }
            } else {
                rhs[j - self.model.n] += v;
            }
        }
        self.lu.ftran(&mut rhs);
        for (slot, &j) in self.basic.iter().enumerate() {
            self.x[j] = rhs[slot];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lo[j] {
            self.lo[j] - v
        } else if v > self.hi[j] {
            v - self.hi[j]
        } else {
            0.0
        }
    }

    fn max_basic_infeasibility(&self) -> f64 {
        self.basic
            .iter()
            .map(|&j| self.infeasibility(j))
            .fold(0.0, f64::max)
    }

    fn objective(&self) -> f64 {
        (0..self.model.n).map(|j| self.model.cost[j] * self.x[j]).sum()
    }

    fn duals(&self, phase_one: bool, tol: f64) -> Vec<f64> {
        let mut c: Vec<f64> = self
            .basic
            .iter()
            .map(|&j| {
                if phase_one {
                    if self.x[j] < self.lo[j] - tol {
                        -1.0
                    } else if self.x[j] > self.hi[j] + tol {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost(j)
                }
            })
            .collect();
        self.lu.btran(&mut c);
        c
    }

    /// Lagrangian bound `Σ_j min_{lo_j <= x_j <= hi_j} d_j x_j` at the
    /// current phase-2 duals.
    fn dual_bound(&self) -> f64 {
        let y = self.duals(false, 0.0);
        let mut total = 0.0;
        for j in 0..self.model.n + self.model.m {
            let d = self.cost(j) - self.dot_col(j, &y);
            let term = if d.abs() <= self.dual_tol {
                d * self.x[j]
            } else if d > 0.0 {
                d * self.lo[j]
            } else {
                d * self.hi[j]
            };
            total += term;
        }
        total
    }

    fn outcome(&self, status: LpStatus, cutoff: bool) -> LpOutcome {
        let (objective, dual_objective) = match status {
            LpStatus::Optimal => (self.objective(), self.dual_bound()),
            _ => (self.objective(), f64::NAN),
        };
        LpOutcome {
            status,
            x: self.x[..self.model.n].to_vec(),
            objective,
            dual_objective,
            iterations: self.iterations,
            cutoff,
        }
    }

    /// Runs to optimality: dual simplex when the starting basis is dual
    /// feasible and `prefer_dual` is set, primal simplex otherwise.
    pub fn solve(&mut self, prefer_dual: bool, cutoff: f64) -> LpOutcome {
        if prefer_dual && self.make_dual_feasible() {
            match self.dual_loop(cutoff) {
                Some(LpStatus::Optimal) => {}
                Some(LpStatus::Infeasible) => return self.outcome(LpStatus::Infeasible, false),
                Some(_) => return self.outcome(LpStatus::IterationLimit, false),
                None => {
                    return self.outcome(LpStatus::Optimal, true);
                }
            }
        }
        let status = self.primal_loop();
        if status == LpStatus::Optimal {
            self.polish();
        }
        self.outcome(status, false)
    }

    /// Removes the small bound violations the Harris ratio test leaves on
    /// basic variables by re-running the primal loop at a much tighter
    /// tolerance. Keeps the original point if that run does not finish.
    fn polish(&mut self) {
        let strict = self.feas_tol * 1e-3;
        if self.max_basic_infeasibility() <= strict {
            return;
        }
        let saved = (self.x.clone(), self.status.clone(), self.basic.clone(), self.lu.clone());
        let loose = self.feas_tol;
        self.feas_tol = strict;
        let status = self.primal_loop();
        self.feas_tol = loose;
        if status != LpStatus::Optimal {
            (self.x, self.status, self.basic, self.lu) = saved;
        }
    }

    /// Flips boxed nonbasic variables to the bound matching their reduced
    /// cost. Returns false if some variable cannot be made dual feasible.
    fn make_dual_feasible(&mut self) -> bool {
        let y = self.duals(false, 0.0);
        let mut flipped = false;
        for j in 0..self.model.n + self.model.m {
            let s = self.status[j];
            if s == VarStatus::Basic || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.cost(j) - self.dot_col(j, &y);
            match s {
                VarStatus::Lower if d < -self.dual_tol => {
                    if !self.hi[j].is_finite() {
                        return false;
                    }
                    self.status[j] = VarStatus::Upper;
                    self.x[j] = self.hi[j];
                    flipped = true;
                }
                VarStatus::Upper if d > self.dual_tol => {
                    if !self.lo[j].is_finite() {
                        return false;
                    }
                    self.status[j] = VarStatus::Lower;
                    self.x[j] = self.lo[j];
                    flipped = true;
                }
                VarStatus::Zero if d.abs() > self.dual_tol => return false,
                _ => {}
            }
        }
        if flipped {
            self.recompute_basic();
        }
        true
    }

    /// Dual simplex. Returns `None` when the objective exceeds `cutoff`.
    fn dual_loop(&mut self, cutoff: f64) -> Option<LpStatus> {
        let m = self.model.m;
        let total = self.model.n + m;
        let mut rho = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        loop {
            if self.iterations >= self.iteration_limit {
                return Some(LpStatus::IterationLimit);
            }
            if self.lu.num_etas() >= REFACTOR_EVERY {
                self.refactor();
            }
            if cutoff.is_finite() && self.objective() > cutoff {
                return None;
            }
            // Leaving variable: largest bound violation.
            let mut leave = None;
            let mut worst = self.feas_tol;
            for (slot, &j) in self.basic.iter().enumerate() {
                let inf = self.infeasibility(j);
                if inf > worst {
                    worst = inf;
                    leave = Some(slot);
                }
            }
            let Some(r) = leave else {
                return Some(LpStatus::Optimal);
            };
            let p = self.basic[r];
            let to_lower = self.x[p] < self.lo[p];

            let y = self.duals(false, 0.0);
            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[r] = 1.0;
            self.lu.btran(&mut rho);

            // Ratio test over nonbasic columns (Harris two-pass).
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            let mut bound = f64::INFINITY;
            for j in 0..total {
                let s = self.status[j];
                if s == VarStatus::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let a = self.dot_col(j, &rho);
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                // Direction in which x_j must move to push x_p toward its bound.
                let eligible = match (to_lower, s) {
                    (true, VarStatus::Lower) => a < 0.0,
                    (true, VarStatus::Upper) => a > 0.0,
                    (false, VarStatus::Lower) => a > 0.0,
                    (false, VarStatus::Upper) => a < 0.0,
                    (_, VarStatus::Zero) => true,
                    _ => false,
                };
                if !eligible {
                    continue;
                }
                let d = self.cost(j) - self.dot_col(j, &y);
                // Reduced cost measured in its feasible direction; slightly
                // negative values get no extra Harris allowance.
                let dsigned = match s {
                    VarStatus::Lower => d,
                    VarStatus::Upper => -d,
                    _ => 0.0,
                };
                bound = bound.min(((dsigned + self.dual_tol) / a.abs()).max(0.0));
                cands.push((j, a, dsigned.max(0.0)));
            }
            if cands.is_empty() {
                return Some(LpStatus::Infeasible);
            }
            let mut enter = None;
            let mut best_a = 0.0;
            for &(j, a, dmag) in &cands {
                if dmag / a.abs() <= bound && a.abs() > best_a {
                    best_a = a.abs();
                    enter = Some((j, a));
                }
            }
            let (q, a_rq) = enter.expect("Harris bound admits at least the minimum ratio");

            alpha.iter_mut().for_each(|v| *v = 0.0);
            self.column_into(q, &mut alpha);
            self.lu.ftran(&mut alpha);
            if (alpha[r] - a_rq).abs() > 1e-7 * (1.0 + a_rq.abs()) {
                // Row and column disagree: refresh the factorization.
                self.refactor();
                self.iterations += 1;
                continue;
            }
            let target = if to_lower { self.lo[p] } else { self.hi[p] };
            let delta_q = (self.x[p] - target) / alpha[r];
            self.x[q] += delta_q;
            for (slot, &j) in self.basic.iter().enumerate() {
                if slot != r {
                    self.x[j] -= delta_q * alpha[slot];
                }
            }
            self.x[p] = target;
            self.status[p] = if to_lower { VarStatus::Lower } else { VarStatus::Upper };
            self.status[q] = VarStatus::Basic;
            self.basic[r] = q;
            self.lu.push_eta(r, &alpha);
            self.iterations += 1;
        }
    }

    fn primal_loop(&mut self) -> LpStatus {
        let m = self.model.m;
        let total = self.model.n + m;
        let mut alpha = vec![0.0; m];
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut relaxed = false;
        let mut last_obj = f64::INFINITY;
        let mut verified = 0;
        loop {
            if self.iterations >= self.iteration_limit {
                return LpStatus::IterationLimit;
            }
            if self.lu.num_etas() >= REFACTOR_EVERY {
                self.refactor();
            }
            let tol = if relaxed { self.feas_tol * 1e3 } else { self.feas_tol };
            let infeas = self.max_basic_infeasibility();
            let phase_one = infeas > tol;
            let y = self.duals(phase_one, tol);

            // Pricing.
            let mut enter: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..total {
                let s = self.status[j];
                if s == VarStatus::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let c = if phase_one { 0.0 } else { self.cost(j) };
                let d = c - self.dot_col(j, &y);
                let gain = match s {
                    VarStatus::Lower => -d,
                    VarStatus::Upper => d,
                    _ => d.abs(),
                };
                if gain <= self.dual_tol {
                    continue;
                }
                if bland {
                    enter = Some((j, d));
                    break;
                }
                if gain > best {
                    best = gain;
                    enter = Some((j, d));
                }
            }

            let Some((q, d_q)) = enter else {
                // No improving column: verify on a fresh factorization first.
                if self.lu.num_etas() > 0 && verified < 3 {
                    verified += 1;
                    self.refactor();
                    continue;
                }
                if phase_one {
                    if infeas <= self.feas_tol * 1e3 && !relaxed {
                        relaxed = true;
                        continue;
                    }
                    return LpStatus::Infeasible;
                }
                return LpStatus::Optimal;
            };
            let dir = match self.status[q] {
                VarStatus::Lower => 1.0,
                VarStatus::Upper => -1.0,
                _ => {
                    if d_q < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };

            alpha.iter_mut().for_each(|v| *v = 0.0);
            self.column_into(q, &mut alpha);
            self.lu.ftran(&mut alpha);

            // Ratio test. Each basic variable moves at rate -dir * alpha.
            let flip = self.hi[q] - self.lo[q];
            let mut theta = f64::INFINITY;
            let mut leave: Option<(usize, VarStatus)> = None;
            let mut limits: Vec<(usize, f64, f64, VarStatus)> = Vec::new();
            let mut harris = f64::INFINITY;
            for (slot, &j) in self.basic.iter().enumerate() {
                let a = alpha[slot];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * a;
                let v = self.x[j];
                let (target, side) = if rate < 0.0 {
                    if v > self.hi[j] + tol {
                        (self.hi[j], VarStatus::Upper)
                    } else if v >= self.lo[j] - tol && self.lo[j].is_finite() {
                        (self.lo[j], VarStatus::Lower)
                    } else {
                        continue;
                    }
                } else if v < self.lo[j] - tol {
                    (self.lo[j], VarStatus::Lower)
                } else if v <= self.hi[j] + tol && self.hi[j].is_finite() {
                    (self.hi[j], VarStatus::Upper)
                } else {
                    continue;
                };
                // Signed distance to the bound along the move; negative when
                // the variable already sits slightly past it.
                let dist = (v - target) / -rate;
                let ratio = dist.max(0.0);
                harris = harris.min((dist + tol / rate.abs()).max(0.0));
                limits.push((slot, ratio, a.abs(), side));
            }
            if bland {
                let min_ratio = limits.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
                for &(slot, ratio, _, side) in &limits {
                    if ratio <= min_ratio + 1e-12 {
                        let better = match leave {
                            None => true,
                            Some((s, _)) => self.basic[slot] < self.basic[s],
                        };
                        if better {
                            leave = Some((slot, side));
                            theta = ratio;
                        }
                    }
                }
            } else {
                let mut best_a = 0.0;
                for &(slot, ratio, a, side) in &limits {
                    if ratio <= harris && a > best_a {
                        best_a = a;
                        leave = Some((slot, side));
                        theta = ratio;
                    }
                }
            }

            if flip <= theta {
                if !flip.is_finite() {
                    if phase_one {
                        // Cannot happen in exact arithmetic; refresh and retry.
                        self.refactor();
                        self.iterations += 1;
                        continue;
                    }
                    return LpStatus::Unbounded;
                }
                let step = dir * flip;
                self.x[q] += step;
                self.status[q] = if dir > 0.0 { VarStatus::Upper } else { VarStatus::Lower };
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                for (slot, &j) in self.basic.iter().enumerate() {
                    self.x[j] -= step * alpha[slot];
                }
                self.iterations += 1;
                degenerate = 0;
                bland = false;
                continue;
            }
            let (r, side) = leave.expect("finite theta has a leaving row");
            let step = dir * theta;
            self.x[q] += step;
            for (slot, &j) in self.basic.iter().enumerate() {
                self.x[j] -= step * alpha[slot];
            }
            let p = self.basic[r];
            self.x[p] = if side == VarStatus::Lower { self.lo[p] } else { self.hi[p] };
            self.status[p] = side;
            self.status[q] = VarStatus::Basic;
            self.basic[r] = q;
            self.lu.push_eta(r, &alpha);
            self.iterations += 1;
            verified = 0;

            let progress = theta * d_q.abs();
            let obj = if phase_one { f64::NAN } else { self.objective() };
            if progress <= 1e-12 || (!phase_one && obj >= last_obj - 1e-12 * last_obj.abs().max(1.0)) {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            if !phase_one {
                last_obj = obj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{ColumnKey, Row};

    fn lp(obj: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>, rows: Vec<(Vec<(usize, f64)>, Sense, f64)>) -> MilpInstance {
        let n = obj.len();
        MilpInstance {
            name: "t".into(),
            num_cols: n,
            objective: obj,
            lower: lo,
            upper: hi,
            is_binary: vec![false; n],
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(i, (terms, sense, rhs))| Row {
                    name: format!("r{i}"),
                    terms,
                    sense,
                    rhs,
                })
                .collect(),
            column_map: (0..n).map(ColumnKey::Generic).collect(),
            groups: vec![],
            infeasible_periods: vec![],
        }
    }

    fn run(milp: &MilpInstance) -> LpOutcome {
        let model = LpModel::from_milp(milp);
        let (lo, hi) = model.bounds(&milp.lower, &milp.upper);
        Simplex::new(&model, lo, hi, None).solve(false, f64::INFINITY)
    }

    #[test]
    fn single_bound_row() {
        let p = lp(vec![1.0], vec![0.0], vec![10.0], vec![(vec![(0, 1.0)], Sense::Ge, 1.0)]);
        let out = run(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.x[0] - 1.0).abs() < 1e-9);
        assert!((out.objective - 1.0).abs() < 1e-9);
        assert!((out.dual_objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn facet_optimum() {
        let p = lp(
            vec![-1.0, -1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0)],
        );
        let out = run(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 1.0).abs() < 1e-9);
        assert!((out.x[0] + out.x[1] - 1.0).abs() < 1e-9);
        assert!((out.dual_objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let p = lp(
            vec![1.0],
            vec![f64::NEG_INFINITY],
            vec![f64::INFINITY],
            vec![(vec![(0, 1.0)], Sense::Ge, 2.0), (vec![(0, 1.0)], Sense::Le, 1.0)],
        );
        assert_eq!(run(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let p = lp(
            vec![-1.0, 0.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY, 5.0],
            vec![(vec![(0, 1.0), (1, -1.0)], Sense::Ge, 0.0)],
        );
        assert_eq!(run(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn dual_simplex_after_bound_change() {
        // min -x - 2y  s.t. x + y <= 4, x - y >= -2, 0 <= x, y <= 3
        let p = lp(
            vec![-1.0, -2.0],
            vec![0.0, 0.0],
            vec![3.0, 3.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Sense::Le, 4.0),
                (vec![(0, 1.0), (1, -1.0)], Sense::Ge, -2.0),
            ],
        );
        let model = LpModel::from_milp(&p);
        let (lo, hi) = model.bounds(&p.lower, &p.upper);
        let mut s = Simplex::new(&model, lo.clone(), hi.clone(), None);
        let first = s.solve(false, f64::INFINITY);
        assert_eq!(first.status, LpStatus::Optimal);
        assert!((first.objective + 7.0).abs() < 1e-9);
        let basis = s.basis();
        let mut hi2 = hi.clone();
        hi2[1] = 2.0;
        let mut warm = Simplex::new(&model, lo.clone(), hi2.clone(), Some(&basis));
        let second = warm.solve(true, f64::INFINITY);
        let mut cold = Simplex::new(&model, lo, hi2, None);
        let third = cold.solve(false, f64::INFINITY);
        assert_eq!(second.status, LpStatus::Optimal);
        assert!((second.objective - third.objective).abs() < 1e-9);
        assert!((second.objective + 6.0).abs() < 1e-9);
    }
}
