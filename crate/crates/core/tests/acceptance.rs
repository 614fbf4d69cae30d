//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a blocking criterion fails.
//!
//! Set `DED_STRETCH=1` to run the 30-minute ten-unit stretch solve.

mod common;

use std::time::{Duration, Instant};

use common::exact_lp::{solve_exact, ExactOutcome};
use ded_core::io::{parse_instance, read_solution};
use ded_core::linearize::{approx_error_report, build_piecewise, default_samples, PiecewiseCost};
use ded_core::milp::{build_milp, extract_solution, read_interchange};
use ded_core::model::{optimality_gap, schedule_cost, validate_schedule, Schedule, SystemInstance};
use ded_core::oracle::{enumerate_solve, random_instance_with, random_lp, RandomOptions, TinyLimits};
use ded_core::solver::{solve_lp, solve_milp, BnbStatus, LpStatus, SolverConfig};

const PUBLISHED_COST: f64 = 1016533.0;
/// Schedule cost and solver bound are summed in different orders, so an
/// exactly tight gap can land one ulp below zero.
const OGAP_FLOOR: f64 = -1e-12;

struct Outcome {
    pass: bool,
    blocking: bool,
    detail: String,
}

fn pass(detail: String) -> Outcome {
    Outcome { pass: true, blocking: true, detail }
}

fn fail(detail: String) -> Outcome {
    Outcome { pass: false, blocking: true, detail }
}

fn ten_unit() -> SystemInstance {
    parse_instance(common::data_path("ten_unit.toml")).expect("bundled instance")
}

/// The published schedule with demand rebuilt from its column sums and no
/// initial outputs, so the first-period ramp checks drop out.
fn published() -> (SystemInstance, Schedule) {
    let sched = read_solution(common::data_path("reference_schedule.sol"))
        .expect("bundled schedule")
        .schedule()
        .expect("schedule has outputs");
    let mut inst = ten_unit();
    for u in &mut inst.units {
        u.initial_power = None;
    }
    inst.demand = (0..inst.horizon)
        .map(|t| {
            let s: f64 = sched.power.iter().map(|row| row[t]).sum();
            (s * 100.0).round() / 100.0
        })
        .collect();
    (inst, sched)
}

fn tiny(seed: u64) -> SystemInstance {
    let n = 1 + (seed % 2) as usize;
    let t = 1 + (seed / 2 % 3) as usize;
    let opts = RandomOptions {
        max_segments: 3,
        ..RandomOptions::default()
    };
    random_instance_with(seed, n, t, opts).expect("tiny instance")
}

fn pwcs(inst: &SystemInstance, m: usize) -> Vec<PiecewiseCost> {
    inst.units.iter().map(|u| build_piecewise(u, m).unwrap()).collect()
}

fn all_lower(inst: &SystemInstance, pw: &[PiecewiseCost]) -> bool {
    inst.units
        .iter()
        .zip(pw)
        .all(|(u, p)| approx_error_report(u, p, default_samples(p)).unwrap().is_lower_approx)
}

fn c1_feasibility() -> Outcome {
    let start = Instant::now();
    let (inst, sched) = published();
    let report = validate_schedule(&inst, &sched, 0.01).unwrap();
    let elapsed = start.elapsed();
    let d1_ok = (inst.demand[0] - 1036.0).abs() < 1e-9;
    let detail = format!(
        "D_1 = {:.2}, worst violation {:.2e} MW, {} violations, {:.3} s",
        inst.demand[0],
        report.worst_violation,
        report.violations.len(),
        elapsed.as_secs_f64()
    );
    if report.is_feasible && d1_ok && elapsed < Duration::from_secs(1) {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn c2_cost() -> Outcome {
    let start = Instant::now();
    let (inst, sched) = published();
    let cost = schedule_cost(&inst, &sched).unwrap();
    let elapsed = start.elapsed();
    let rel = (cost - PUBLISHED_COST) / PUBLISHED_COST;
    let mut detail = format!(
        "schedule cost {cost:.2} vs {PUBLISHED_COST}, deviation {:+.3}% (limit 0.1%), {:.3} s",
        rel * 100.0,
        elapsed.as_secs_f64()
    );
    if rel.abs() <= 1e-3 && elapsed < Duration::from_secs(1) {
        return pass(detail);
    }
    // Report the discrepancy against the dataset, unit by unit.
    let mut quad = 0.0;
    let mut ripple = 0.0;
    let mut worst = (0usize, 0.0f64);
    for (i, u) in inst.units.iter().enumerate() {
        let v: f64 = sched.power[i].iter().map(|&p| u.vpe_cost(p).unwrap()).sum();
        quad += sched.power[i].iter().map(|&p| u.quadratic_cost(p).unwrap()).sum::<f64>();
        ripple += v;
        if v > worst.1 {
            worst = (i, v);
        }
    }
    detail.push_str(&format!(
        "; dataset discrepancy: quadratic {quad:.1} + ripple {ripple:.1}, largest ripple share \
         unit {} ({:.1}); total without it {:.1}",
        worst.0 + 1,
        worst.1,
        cost - worst.1
    ));
    fail(detail)
}

fn c3_oracle() -> (Outcome, Vec<(SystemInstance, f64, f64)>) {
    let start = Instant::now();
    let cfg = SolverConfig {
        rgap_target: 0.0,
        ..SolverConfig::default()
    };
    let mut worst = 0.0f64;
    let mut mismatches = Vec::new();
    let mut runs = Vec::new();
    let mut max_l = 0;
    for seed in 0..200u64 {
        let inst = tiny(seed);
        let pw = pwcs(&inst, 2);
        max_l = max_l.max(pw.iter().map(|p| p.num_segments).max().unwrap());
        let milp = build_milp(&inst, &pw).unwrap();
        let got = solve_milp(&milp, &cfg).unwrap();
        let want = enumerate_solve(&milp, TinyLimits::default()).unwrap();
        let agree = match (got.incumbent_obj.is_finite(), want.incumbent_obj.is_finite()) {
            (true, true) => {
                let d = (got.incumbent_obj - want.incumbent_obj).abs();
                worst = worst.max(d);
                d <= 1e-6
            }
            (false, false) => true,
            _ => false,
        };
        if !agree {
            mismatches.push(seed);
        }
        if let Some(x) = &got.incumbent {
            let s = extract_solution(&milp, x, &inst).unwrap();
            runs.push((inst.clone(), schedule_cost(&inst, &s).unwrap(), got.best_bound));
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "200 instances (max L = {max_l}), worst |diff| {worst:.2e}, mismatched seeds {mismatches:?}, {:.1} s",
        elapsed.as_secs_f64()
    );
    let ok = mismatches.is_empty() && max_l <= 3 && elapsed < Duration::from_secs(120);
    (if ok { pass(detail) } else { fail(detail) }, runs)
}

fn c4_duality() -> Outcome {
    let start = Instant::now();
    let mut counts = [0usize; 4];
    let mut worst = 0.0f64;
    let mut bad_gap = Vec::new();
    let mut non_optimal = Vec::new();
    let mut lps = Vec::new();
    for seed in 0..500u64 {
        let n_cols = 2 + (seed % 5) as usize;
        let n_rows = 1 + (seed / 5 % 4) as usize;
        let lp = random_lp(seed, n_cols, n_rows);
        let sol = solve_lp(&lp, &[]).unwrap();
        match sol.status {
            LpStatus::Optimal => {
                counts[0] += 1;
                let rel = (sol.objective - sol.dual_objective).abs() / sol.objective.abs().max(1.0);
                worst = worst.max(rel);
                if rel > 1e-7 {
                    bad_gap.push(seed);
                }
            }
            LpStatus::Infeasible => {
                counts[1] += 1;
                non_optimal.push(seed);
            }
            LpStatus::Unbounded => {
                counts[2] += 1;
                non_optimal.push(seed);
            }
            LpStatus::IterationLimit => counts[3] += 1,
        }
        lps.push((lp, sol.status, sol.objective));
    }
    let float_time = start.elapsed();
    // Exact recheck: the first 20 instances reported infeasible or unbounded.
    let mut disagree = Vec::new();
    for &seed in non_optimal.iter().take(20) {
        let (lp, status, _) = &lps[seed as usize];
        let exact = solve_exact(lp);
        let same = matches!(
            (status, &exact),
            (LpStatus::Infeasible, ExactOutcome::Infeasible) | (LpStatus::Unbounded, ExactOutcome::Unbounded)
        );
        if !same {
            disagree.push((seed, exact));
        }
    }
    let checked = non_optimal.len().min(20);
    let detail = format!(
        "optimal {} / infeasible {} / unbounded {} / iteration limit {}, worst duality gap {worst:.1e}, \
         gaps over 1e-7 {bad_gap:?}, exact status disagreements {disagree:?} on {checked} rechecked, {:.2} s",
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        float_time.as_secs_f64()
    );
    let ok = bad_gap.is_empty()
        && disagree.is_empty()
        && checked == 20
        && counts[3] == 0
        && float_time < Duration::from_secs(60);
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn chord(grid: &[f64], vals: &[f64], p: f64) -> f64 {
    let k = grid.windows(2).position(|w| p <= w[1]).unwrap_or(grid.len() - 2);
    let (a, b) = (grid[k], grid[k + 1]);
    let w = (p - a) / (b - a);
    vals[k] + w * (vals[k + 1] - vals[k])
}

fn c5_linearization() -> Outcome {
    let start = Instant::now();
    let inst = ten_unit();
    let mut worst_exact = 0.0f64;
    let mut worst_dom = 0.0f64;
    let mut failures = Vec::new();
    for m in [2usize, 4] {
        for (i, u) in inst.units.iter().enumerate() {
            let pw = build_piecewise(u, m).unwrap();
            for &a in &pw.breakpoints {
                let c = u.true_cost(a).unwrap();
                let rel = (pw.approx_cost(a).unwrap() - c).abs() / c.abs().max(1.0);
                worst_exact = worst_exact.max(rel);
                if rel > 1e-9 {
                    failures.push(format!("M={m} unit {} breakpoint {a}", i + 1));
                }
            }
            let ripple: Vec<f64> = pw.breakpoints.iter().map(|&a| u.vpe_cost(a).unwrap()).collect();
            let n = 10 * pw.num_segments + 1;
            for s in 0..n {
                let p = if s + 1 == n {
                    u.p_max
                } else {
                    u.p_min + (u.p_max - u.p_min) * s as f64 / (n - 1) as f64
                };
                let hat = pw.approx_cost(p).unwrap();
                let rhs = u.quadratic_cost(p).unwrap() + chord(&pw.breakpoints, &ripple, p);
                let slack = (hat - rhs) / hat.abs().max(1.0);
                worst_dom = worst_dom.min(slack);
                if slack < -1e-9 {
                    failures.push(format!("M={m} unit {} dominance at {p}", i + 1));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "worst breakpoint error {worst_exact:.1e}, most negative dominance slack {worst_dom:.1e}, \
         failures {failures:?}, {:.3} s",
        elapsed.as_secs_f64()
    );
    if failures.is_empty() && elapsed < Duration::from_secs(1) {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn c6_lower_audit() -> Outcome {
    let inst = ten_unit();
    let mut flags = Vec::new();
    for u in &inst.units {
        let pw = build_piecewise(u, 2).unwrap();
        let r = approx_error_report(u, &pw, default_samples(&pw)).unwrap();
        flags.push((u.id + 1, r.is_lower_approx, r.max_over));
    }
    let failing: Vec<_> = flags.iter().filter(|f| !f.1).map(|f| f.0).collect();
    let worst_over = flags.iter().fold(0.0f64, |m, f| m.max(f.2));
    let detail = format!(
        "is_lower_approx on {}/{} units, largest overestimate {worst_over:.1e}, units flagged {failing:?}",
        flags.len() - failing.len(),
        flags.len()
    );
    if failing.is_empty() {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn c7_gap_contract(exact_runs: &[(SystemInstance, f64, f64)]) -> Outcome {
    let mut gap_reached = 0;
    let mut violations = Vec::new();
    let mut worst_ogap = f64::INFINITY;
    let mut checked_ogap = 0;
    let mut check = |label: String, inst: &SystemInstance, target: f64| {
        let pw = pwcs(inst, 2);
        let milp = build_milp(inst, &pw).unwrap();
        let cfg = SolverConfig {
            rgap_target: target,
            ..SolverConfig::default()
        };
        let r = solve_milp(&milp, &cfg).unwrap();
        let Some(x) = &r.incumbent else { return };
        let cost = schedule_cost(inst, &extract_solution(&milp, x, inst).unwrap()).unwrap();
        if r.status == BnbStatus::GapReached {
            gap_reached += 1;
            if r.achieved_rgap > target {
                violations.push(format!("{label}: rgap {} > {target}", r.achieved_rgap));
            }
            if optimality_gap(cost, r.best_bound).is_err() {
                violations.push(format!("{label}: ogap not reportable"));
            }
        }
    };
    for seed in 0..200u64 {
        check(format!("tiny {seed} @0.05"), &tiny(seed), 0.05);
    }
    let opts = RandomOptions {
        max_segments: 4,
        ..RandomOptions::default()
    };
    for seed in 0..20u64 {
        let inst = random_instance_with(1000 + seed, 3, 4, opts).unwrap();
        check(format!("medium {seed} @0.0025"), &inst, 0.0025);
    }
    for (inst, cost, bound) in exact_runs {
        if all_lower(inst, &pwcs(inst, 2)) && *bound > 0.0 {
            let g = optimality_gap(*cost, *bound).unwrap();
            checked_ogap += 1;
            worst_ogap = worst_ogap.min(g);
            if g < OGAP_FLOOR {
                violations.push(format!("negative ogap {g:e}"));
            }
        }
    }
    let detail = format!(
        "{gap_reached} gap-reached runs, {checked_ogap} converged runs with lower approximations, \
         smallest ogap {worst_ogap:.2e}, violations {violations:?}"
    );
    if violations.is_empty() && gap_reached > 0 && checked_ogap > 0 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn c8_stretch() -> Outcome {
    if std::env::var_os("DED_STRETCH").is_none() {
        return Outcome {
            pass: true,
            blocking: false,
            detail: "skipped; set DED_STRETCH=1 for the 30-minute ten-unit solve".into(),
        };
    }
    let inst = ten_unit();
    let milp = build_milp(&inst, &pwcs(&inst, 2)).unwrap();
    let cfg = SolverConfig {
        time_limit: 1800.0,
        threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..SolverConfig::default()
    };
    let r = solve_milp(&milp, &cfg).unwrap();
    let cost = r
        .incumbent
        .as_ref()
        .map(|x| schedule_cost(&inst, &extract_solution(&milp, x, &inst).unwrap()).unwrap())
        .unwrap_or(f64::INFINITY);
    Outcome {
        pass: cost <= 1_020_000.0,
        blocking: false,
        detail: format!(
            "status {}, schedule cost {cost:.2} (target 1020000), achieved rgap {:.4}, {} nodes, {:.0} s",
            r.status, r.achieved_rgap, r.nodes_processed, r.wall_time
        ),
    }
}

fn c9_dump_hook() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ten_unit.milp");
    let inst_path = common::data_path("ten_unit.toml");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = ded_core::cli::run(
        [
            "ded",
            "solve",
            inst_path.to_str().unwrap(),
            "--m-segments",
            "2",
            "--node-limit",
            "1",
            "--dump-model",
            path.to_str().unwrap(),
        ],
        &mut out,
        &mut err,
    );
    let inst = ten_unit();
    let built = build_milp(&inst, &pwcs(&inst, 2)).unwrap();
    let read = std::fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|t| {
        read_interchange(&t).map_err(|e| e.to_string())
    });
    let same = match &read {
        Ok(m) => {
            m.num_cols == built.num_cols
                && m.objective == built.objective
                && m.lower == built.lower
                && m.upper == built.upper
                && m.is_binary == built.is_binary
                && m.rows == built.rows
        }
        Err(_) => false,
    };
    Outcome {
        pass: same,
        blocking: false,
        detail: format!(
            "dump written (solve exit {code}), round-trips to the built model: {same}; \
             the external-solver comparison is documentation-verified (see README)"
        ),
    }
}

fn main() {
    let mut lines = Vec::new();
    lines.push(("1 reference schedule feasibility", c1_feasibility()));
    lines.push(("2 reference schedule cost", c2_cost()));
    let (o3, exact_runs) = c3_oracle();
    lines.push(("3 oracle equivalence", o3));
    lines.push(("4 lp duality", c4_duality()));
    lines.push(("5 linearization exactness and dominance", c5_linearization()));
    lines.push(("6 lower-approximation audit", c6_lower_audit()));
    lines.push(("7 gap contract", c7_gap_contract(&exact_runs)));
    lines.push(("8 desk-scale stretch (non-blocking)", c8_stretch()));
    lines.push(("9 cross-check hook (documentation)", c9_dump_hook()));

    let mut blocking_failures = 0;
    for (name, o) in &lines {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} - {}", o.detail);
        if !o.pass && o.blocking {
            blocking_failures += 1;
        }
    }
    println!("acceptance: {blocking_failures} blocking failure(s)");
    if blocking_failures > 0 {
        std::process::exit(1);
    }
}
