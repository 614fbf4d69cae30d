//! Brute-force reference solver and random instance generators.
//!
//! [`enumerate_solve`] fixes one segment per unit-period for every possible
//! combination, solves each remaining LP, and keeps the best. It is meant
//! for instances with at most a few hundred thousand assignments.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{DedError, Result};
use crate::linearize::{segment_count, PiecewiseCost};
use crate::milp::{ColumnKey, MilpInstance, Row, Sense};
use crate::model::{GeneratorUnit, ReserveProduct, Schedule, SystemInstance};
use crate::solver::{relative_gap, solve_lp, BnbResult, BnbStatus, BoundOverride, LpStatus};

/// Row and bound tolerance used to accept an enumerated LP optimum.
const CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TinyLimits {
    pub max_assignments: u128,
}

impl Default for TinyLimits {
    fn default() -> Self {
        TinyLimits {
            max_assignments: 1_000_000,
        }
    }
}

/// A set of binaries of which exactly one (or, for a lone binary, zero or
/// one) is set in each enumerated assignment.
#[derive(Debug, Clone)]
struct Choice {
    label: String,
    cols: Vec<usize>,
    /// A lone binary not tied to a segment group takes both values.
    free_binary: bool,
}

impl Choice {
    fn options(&self) -> usize {
        if self.free_binary {
            2
        } else {
            self.cols.len()
        }
    }

    fn fix(&self, pick: usize, out: &mut Vec<BoundOverride>) {
        if self.free_binary {
            let v = pick as f64;
            out.push(BoundOverride {
                col: self.cols[0],
                lower: v,
                upper: v,
            });
            return;
        }
        for (k, &c) in self.cols.iter().enumerate() {
            let v = if k == pick { 1.0 } else { 0.0 };
            out.push(BoundOverride {
                col: c,
                lower: v,
                upper: v,
            });
        }
    }
}

fn choices(milp: &MilpInstance) -> Vec<Choice> {
    let mut covered = vec![false; milp.num_cols];
    let mut out = Vec::new();
    // Segment binaries grouped by unit-period through the column map.
    let mut by_cell: Vec<((usize, usize), Vec<(usize, usize)>)> = Vec::new();
    for (j, key) in milp.column_map.iter().enumerate() {
        if let ColumnKey::Binary { unit, period, segment } = *key {
            match by_cell.iter_mut().find(|(cell, _)| *cell == (unit, period)) {
                Some((_, v)) => v.push((segment, j)),
                None => by_cell.push(((unit, period), vec![(segment, j)])),
            }
        }
    }
    for ((unit, period), mut cols) in by_cell {
        cols.sort();
        for &(_, j) in &cols {
            covered[j] = true;
        }
        out.push(Choice {
            label: format!("L[{},{}]", unit + 1, period + 1),
            cols: cols.into_iter().map(|(_, j)| j).collect(),
            free_binary: false,
        });
    }
    for j in 0..milp.num_cols {
        if milp.is_binary[j] && !covered[j] {
            out.push(Choice {
                label: milp.column_name(j),
                cols: vec![j],
                free_binary: true,
            });
        }
    }
    out
}

/// Exact optimum by enumerating every segment assignment.
///
/// Each candidate LP optimum is re-checked against the rows and bounds
/// before it is accepted, so a simplex fault shows up as an error instead of
/// a wrong answer. Ties keep the lexicographically first assignment.
pub fn enumerate_solve(milp: &MilpInstance, limits: TinyLimits) -> Result<BnbResult> {
    milp.validate()?;
    let start = Instant::now();
    let choices = choices(milp);
    let mut count: u128 = 1;
    for c in &choices {
        count = count.saturating_mul(c.options() as u128);
    }
    if count > limits.max_assignments {
        let detail = choices
            .iter()
            .map(|c| format!("{}={}", c.label, c.options()))
            .collect::<Vec<_>>()
            .join(" x ");
        return Err(DedError::EnumerationCap {
            detail,
            count,
            cap: limits.max_assignments,
        });
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pick = vec![0usize; choices.len()];
    let mut overrides = Vec::new();
    let mut visited = 0usize;
    loop {
        overrides.clear();
        for (c, &p) in choices.iter().zip(&pick) {
            c.fix(p, &mut overrides);
        }
        let lp = solve_lp(milp, &overrides)?;
        visited += 1;
        match lp.status {
            LpStatus::Optimal => {
                let viol = milp.max_violation(&lp.x);
                if viol > CHECK_TOL {
                    return Err(DedError::Numerical(format!(
                        "LP optimum for assignment {pick:?} violates the model by {viol:e}"
                    )));
                }
                let obj = milp.objective_value(&lp.x);
                if best.as_ref().map_or(true, |(b, _)| obj < *b - 1e-12 * b.abs().max(1.0)) {
                    best = Some((obj, lp.x));
                }
            }
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => {
                return Err(DedError::Numerical(format!(
                    "assignment {pick:?} leaves an unbounded LP"
                )))
            }
            LpStatus::IterationLimit => {
                return Err(DedError::Numerical(format!(
                    "LP for assignment {pick:?} hit the iteration limit"
                )))
            }
        }
        // Odometer increment, last choice fastest.
        let mut k = choices.len();
        loop {
            if k == 0 {
                return Ok(finish(best, visited, start));
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < choices[k].options() {
                break;
            }
            pick[k] = 0;
        }
    }
}

fn finish(best: Option<(f64, Vec<f64>)>, visited: usize, start: Instant) -> BnbResult {
    let wall_time = start.elapsed().as_secs_f64();
    match best {
        Some((obj, x)) => BnbResult {
            status: BnbStatus::Optimal,
            incumbent: Some(x),
            incumbent_obj: obj,
            best_bound: obj,
            achieved_rgap: relative_gap(obj, obj).max(0.0),
            nodes_processed: visited,
            wall_time,
            trace: Vec::new(),
        },
        None => BnbResult {
            status: BnbStatus::Infeasible,
            incumbent: None,
            incumbent_obj: f64::INFINITY,
            best_bound: f64::INFINITY,
            achieved_rgap: f64::INFINITY,
            nodes_processed: visited,
            wall_time,
            trace: Vec::new(),
        },
    }
}

/// Outcome of [`grid_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridCheck {
    /// Best linearized cost over grid trajectories, `None` if no grid
    /// trajectory is feasible.
    pub reference: Option<f64>,
    /// Largest cost error the grid spacing can introduce.
    pub resolution_bound: f64,
}

/// Simplex-free reference for one-unit instances.
///
/// With a single unit the balance row pins the output, so each period is
/// scanned on a grid of spacing `step` for points within half a step of the
/// demand. The trajectory is accepted if limits, ramps, and reserves hold to
/// within one step. The minimum linearized cost is returned together with
/// the error the grid spacing can cause.
pub fn grid_check(inst: &SystemInstance, pwc: &PiecewiseCost, step: f64) -> Result<GridCheck> {
    if inst.num_units() != 1 {
        return Err(DedError::InvalidArgument(
            "grid check applies to one-unit instances only".into(),
        ));
    }
    if !(step > 0.0) {
        return Err(DedError::InvalidArgument("grid step must be positive".into()));
    }
    let u = &inst.units[0];
    let n_steps = ((u.p_max - u.p_min) / step).floor() as usize;
    let mut power = Vec::with_capacity(inst.horizon);
    let mut total = 0.0;
    for t in 0..inst.horizon {
        let mut pick: Option<(f64, f64)> = None;
        for s in 0..=n_steps {
            let p = u.p_min + s as f64 * step;
            if (p - inst.demand[t]).abs() > 0.5 * step + 1e-9 {
                continue;
            }
            let c = pwc.approx_cost(p)?;
            if pick.map_or(true, |(_, bc)| c < bc) {
                pick = Some((p, c));
            }
        }
        let Some((p, c)) = pick else {
            return Ok(GridCheck {
                reference: None,
                resolution_bound: 0.0,
            });
        };
        power.push(p);
        total += c;
    }
    let sched = Schedule::new(vec![power]);
    let report = crate::model::validate_schedule(inst, &sched, step)?;
    let max_slope = pwc.slopes.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    Ok(GridCheck {
        reference: report.is_feasible.then_some(total),
        resolution_bound: max_slope * 0.5 * step * inst.horizon as f64,
    })
}

/// Options for [`random_instance_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomOptions {
    /// Largest segment count per unit at `M = 2`.
    pub max_segments: usize,
    /// Probability of attaching one reserve product.
    pub reserve_probability: f64,
    /// Probability that units carry an initial output.
    pub initial_power_probability: f64,
}

impl Default for RandomOptions {
    fn default() -> Self {
        RandomOptions {
            max_segments: 4,
            reserve_probability: 0.5,
            initial_power_probability: 0.5,
        }
    }
}

/// Deterministic random instance with default options.
pub fn random_instance(seed: u64, n_units: usize, n_periods: usize) -> Result<SystemInstance> {
    random_instance_with(seed, n_units, n_periods, RandomOptions::default())
}

/// Deterministic random instance.
///
/// Demand and reserve requirements come from a ramp-feasible output
/// trajectory, so the dispatch problem always has a feasible point.
pub fn random_instance_with(
    seed: u64,
    n_units: usize,
    n_periods: usize,
    opts: RandomOptions,
) -> Result<SystemInstance> {
    if n_units == 0 || n_periods == 0 {
        return Err(DedError::InvalidArgument("need at least one unit and one period".into()));
    }
    if opts.max_segments == 0 {
        return Err(DedError::InvalidArgument("max_segments must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let with_initial = rng.gen_bool(opts.initial_power_probability.clamp(0.0, 1.0));
    let mut units = Vec::with_capacity(n_units);
    let mut paths = Vec::with_capacity(n_units);
    for id in 0..n_units {
        let p_min = rng.gen_range(10.0..100.0f64).round();
        let width = rng.gen_range(20.0..200.0f64).round();
        let p_max = p_min + width;
        let target = rng.gen_range(1..=opts.max_segments) as f64;
        // ceil(2 f width / pi) = target for f inside this open interval.
        let f = (target - rng.gen_range(0.1..0.9)) * std::f64::consts::PI / (2.0 * width);
        let ramp_up = (rng.gen_range(0.2..0.8) * width).round().max(1.0);
        let ramp_down = (rng.gen_range(0.2..0.8) * width).round().max(1.0);
        let mut path = Vec::with_capacity(n_periods + 1);
        let mut p: f64 = rng.gen_range(p_min..=p_max);
        path.push(p);
        for _ in 0..n_periods {
            p = (p + rng.gen_range(-0.8 * ramp_down..=0.8 * ramp_up)).clamp(p_min, p_max);
            path.push(p);
        }
        units.push(GeneratorUnit {
            id,
            alpha: rng.gen_range(100.0..1000.0),
            beta: rng.gen_range(10.0..30.0),
            gamma: rng.gen_range(0.001..0.1),
            e: rng.gen_range(50.0..400.0),
            f,
            p_min,
            p_max,
            ramp_down,
            ramp_up,
            initial_power: with_initial.then_some(path[0]),
        });
        paths.push(path);
    }
    let demand: Vec<f64> = (1..=n_periods)
        .map(|t| paths.iter().map(|path| path[t]).sum())
        .collect();
    let mut reserves = Vec::new();
    if rng.gen_bool(opts.reserve_probability.clamp(0.0, 1.0)) {
        let tau = if rng.gen_bool(0.5) { 1.0 } else { 1.0 / 6.0 };
        let share = rng.gen_range(0.0..0.8);
        let requirement = (1..=n_periods)
            .map(|t| {
                let room: f64 = units
                    .iter()
                    .zip(&paths)
                    .map(|(u, path)| (u.p_max - path[t]).min(tau * u.ramp_up))
                    .sum();
                share * room
            })
            .collect();
        reserves.push(ReserveProduct { tau, requirement });
    }
    let inst = SystemInstance::new(units, demand, reserves, n_periods)?;
    debug_assert!(inst.units.iter().all(|u| segment_count(u, 2) <= opts.max_segments));
    Ok(inst)
}

/// Deterministic random LP (no binary columns) with small integer data.
///
/// Roughly half the draws are built around a known feasible point; the rest
/// use free right-hand sides and occasionally infinite bounds, so infeasible
/// and unbounded problems also occur.
pub fn random_lp(seed: u64, n_cols: usize, n_rows: usize) -> MilpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchored = rng.gen_bool(0.5);
    let mut lower = Vec::with_capacity(n_cols);
    let mut upper = Vec::with_capacity(n_cols);
    for _ in 0..n_cols {
        let lo: f64 = rng.gen_range(-5..=2) as f64;
        let hi = lo + rng.gen_range(0..=8) as f64;
        lower.push(if rng.gen_bool(0.15) { f64::NEG_INFINITY } else { lo });
        upper.push(if rng.gen_bool(0.15) { f64::INFINITY } else { hi });
    }
    let point: Vec<f64> = (0..n_cols)
        .map(|j| {
            let lo = if lower[j].is_finite() { lower[j] } else { upper[j].min(0.0) - 3.0 };
            let hi = if upper[j].is_finite() { upper[j] } else { lo + 6.0 };
            rng.gen_range(lo as i64..=hi as i64) as f64
        })
        .collect();
    let objective = (0..n_cols).map(|_| rng.gen_range(-6..=6) as f64).collect();
    let mut rows = Vec::with_capacity(n_rows);
    for i in 0..n_rows {
        let mut terms = Vec::new();
        for j in 0..n_cols {
            if rng.gen_bool(0.6) {
                let a = rng.gen_range(-5..=5) as f64;
                if a != 0.0 {
                    terms.push((j, a));
                }
            }
        }
        if terms.is_empty() {
            terms.push((rng.gen_range(0..n_cols), 1.0));
        }
        let sense = match rng.gen_range(0..5) {
            0 => Sense::Eq,
            1 | 2 => Sense::Le,
            _ => Sense::Ge,
        };
        let act: f64 = terms.iter().map(|&(j, a)| a * point[j]).sum();
        let rhs = if anchored {
            match sense {
                Sense::Eq => act,
                Sense::Le => act + rng.gen_range(0..=3) as f64,
                Sense::Ge => act - rng.gen_range(0..=3) as f64,
            }
        } else {
            rng.gen_range(-10..=10) as f64
        };
        rows.push(Row {
            name: format!("r{}", i + 1),
            terms,
            sense,
            rhs,
        });
    }
    MilpInstance {
        name: format!("random-lp-{seed}"),
        num_cols: n_cols,
        objective,
        lower,
        upper,
        is_binary: vec![false; n_cols],
        rows,
        column_map: (0..n_cols).map(ColumnKey::Generic).collect(),
        groups: Vec::new(),
        infeasible_periods: Vec::new(),
    }
}
