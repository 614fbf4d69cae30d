//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a solve is infeasible or stops on a
//! limit (or a schedule fails validation), 2 on usage and input errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{DedError, Result};
use crate::io::{
    duplicate_system, read_instance_file, read_solution, render_solution, write_instance, Metadata, SolutionFile,
    SolveMetadata,
};
use crate::linearize::{approx_error_report, build_piecewise, default_samples, ApproxErrorReport, PiecewiseCost};
use crate::milp::{build_milp, extract_solution, write_interchange, write_mps, MilpInstance};
use crate::model::{schedule_cost, validate_schedule, SystemInstance, DEFAULT_VALIDATION_TOL};
use crate::oracle::{enumerate_solve, random_instance, TinyLimits};
use crate::solver::{solve_milp, write_trace, BnbResult, BnbStatus, BranchingRule, NodeSelection, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "ded", version, about = "Dynamic economic dispatch with valve-point costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linearize, build the MILP, and solve it.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 2)]
        m_segments: usize,
        #[arg(long, default_value_t = 0.0025)]
        rgap: f64,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<usize>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "most-fractional")]
        branching: String,
        #[arg(long, default_value = "best-bound")]
        node_selection: String,
        #[arg(long)]
        no_heuristic: bool,
        /// Solution file; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the MILP in the native interchange format.
        #[arg(long)]
        dump_model: Option<PathBuf>,
        /// Write the MILP in free MPS format.
        #[arg(long)]
        dump_mps: Option<PathBuf>,
        /// Write the node trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a solution file against an instance.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VALIDATION_TOL)]
        tol: f64,
    },
    /// Total true cost of a solution file.
    EvalCost { instance: PathBuf, solution: PathBuf },
    /// Per-unit breakpoints, chords, and approximation error as JSON.
    Linearize {
        instance: PathBuf,
        #[arg(long)]
        m_segments: usize,
        /// Error samples per unit; defaults to 10 per segment plus one.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Exact solve by enumerating every segment assignment.
    Oracle {
        instance: PathBuf,
        #[arg(long)]
        m_segments: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_assignments: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replicate every unit k times, scaling demand and reserves.
    Duplicate {
        instance: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a random instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        units: usize,
        #[arg(long)]
        periods: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs the CLI on `argv` (program name first) with the process streams.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Same as [`cli_main`] with caller-supplied output streams.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                DedError::EnumerationCap { .. } | DedError::Numerical(_) => 1,
                _ => 2,
            }
        }
    }
}

fn load(path: &Path) -> Result<(SystemInstance, Metadata)> {
    let f = read_instance_file(path)?;
    Ok((f.instance, f.metadata))
}

fn build(inst: &SystemInstance, m: usize) -> Result<(Vec<PiecewiseCost>, MilpInstance)> {
    if m == 0 {
        return Err(DedError::InvalidArgument("--m-segments must be at least 1".into()));
    }
    let pwcs = inst
        .units
        .iter()
        .map(|u| build_piecewise(u, m))
        .collect::<Result<Vec<_>>>()?;
    let milp = build_milp(inst, &pwcs)?;
    Ok((pwcs, milp))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, sol: &SolutionFile) -> Result<()> {
    let text = render_solution(sol);
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Solve {
            instance,
            m_segments,
            rgap,
            time_limit,
            node_limit,
            threads,
            seed,
            branching,
            node_selection,
            no_heuristic,
            out: out_path,
            dump_model,
            dump_mps,
            trace,
        } => {
            let (inst, meta) = load(&instance)?;
            let cfg = SolverConfig {
                rgap_target: rgap,
                time_limit: time_limit.unwrap_or(f64::INFINITY),
                node_limit: node_limit.unwrap_or(usize::MAX),
                threads,
                seed,
                branching_rule: branching.parse::<BranchingRule>()?,
                node_selection: node_selection.parse::<NodeSelection>()?,
                heuristic: !no_heuristic,
                trace: trace.is_some(),
                ..SolverConfig::default()
            };
            cfg.validate()?;
            let mut config = BTreeMap::new();
            config.insert("m_segments".to_string(), m_segments.to_string());
            config.insert("rgap_target".to_string(), rgap.to_string());
            config.insert("time_limit".to_string(), cfg.time_limit.to_string());
            config.insert("threads".to_string(), threads.to_string());
            config.insert("seed".to_string(), seed.to_string());
            config.insert("branching".to_string(), branching);
            config.insert("node_selection".to_string(), node_selection);
            let mut sm = SolveMetadata {
                name: meta.name.clone(),
                config,
                ..SolveMetadata::default()
            };

            let bad = inst.static_infeasibility();
            if !bad.is_empty() {
                let periods: Vec<String> = bad.iter().map(|t| (t + 1).to_string()).collect();
                writeln!(err, "demand outside unit limits in periods {}", periods.join(", "))?;
                sm.status = BnbStatus::Infeasible.to_string();
                emit(out, out_path.as_deref(), &SolutionFile::new(&inst, None, sm)?)?;
                return Ok(1);
            }

            let (_, milp) = build(&inst, m_segments)?;
            if let Some(p) = &dump_model {
                std::fs::write(p, write_interchange(&milp))?;
            }
            if let Some(p) = &dump_mps {
                std::fs::write(p, write_mps(&milp))?;
            }
            writeln!(
                err,
                "model: {} columns ({} binary), {} rows",
                milp.num_cols,
                milp.is_binary.iter().filter(|&&b| b).count(),
                milp.num_rows()
            )?;
            let res = solve_milp(&milp, &cfg)?;
            if let Some(p) = &trace {
                write_trace(&res.trace, std::fs::File::create(p)?)?;
            }
            fill_meta(&mut sm, &res);
            let schedule = match &res.incumbent {
                Some(x) => Some(extract_solution(&milp, x, &inst)?),
                None => None,
            };
            let sol = SolutionFile::new(&inst, schedule.as_ref(), sm)?;
            writeln!(
                err,
                "status {} | true cost {} | milp objective {} | bound {} | rgap {} | ogap {} | {} nodes in {:.2} s",
                res.status,
                fmt_opt(sol.true_cost),
                fmt_opt(sol.meta.milp_objective),
                fmt_opt(sol.meta.best_bound),
                fmt_opt(sol.meta.rgap),
                fmt_opt(sol.ogap),
                res.nodes_processed,
                res.wall_time
            )?;
            emit(out, out_path.as_deref(), &sol)?;
            Ok(match res.status {
                BnbStatus::Optimal | BnbStatus::GapReached => 0,
                _ => 1,
            })
        }
        Command::Validate { instance, solution, tol } => {
            let (inst, _) = load(&instance)?;
            let sol = read_solution(&solution)?;
            let Some(schedule) = sol.schedule() else {
                writeln!(out, "solution has no outputs (status {})", sol.meta.status)?;
                return Ok(1);
            };
            let report = validate_schedule(&inst, &schedule, tol)?;
            writeln!(
                out,
                "feasible: {} (worst violation {:.6} MW, tolerance {} MW)",
                if report.is_feasible { "yes" } else { "no" },
                report.worst_violation,
                report.tolerance
            )?;
            for v in &report.violations {
                let mut at = format!("t={}", v.period + 1);
                if let Some(u) = v.unit {
                    at.push_str(&format!(" unit={}", u + 1));
                }
                if let Some(r) = v.product {
                    at.push_str(&format!(" reserve={}", r + 1));
                }
                writeln!(out, "  {} {at}: {:.6} MW", v.kind, v.magnitude)?;
            }
            Ok(if report.is_feasible { 0 } else { 1 })
        }
        Command::EvalCost { instance, solution } => {
            let (inst, _) = load(&instance)?;
            let sol = read_solution(&solution)?;
            let schedule = sol
                .schedule()
                .ok_or_else(|| DedError::InvalidArgument("solution has no outputs".into()))?;
            let cost = schedule_cost(&inst, &schedule)?;
            writeln!(out, "true_cost = {cost:.2}")?;
            if let Some(z) = sol.meta.milp_objective {
                writeln!(out, "milp_objective = {z:.2}")?;
            }
            Ok(0)
        }
        Command::Linearize {
            instance,
            m_segments,
            samples,
        } => {
            let (inst, _) = load(&instance)?;
            let (pwcs, _) = build(&inst, m_segments)?;
            let mut units = Vec::with_capacity(pwcs.len());
            for (u, pwc) in inst.units.iter().zip(pwcs) {
                let n = samples.unwrap_or_else(|| default_samples(&pwc));
                let error = approx_error_report(u, &pwc, n)?;
                units.push(UnitReport {
                    unit: u.id + 1,
                    num_segments: pwc.num_segments,
                    breakpoints: pwc.breakpoints,
                    slopes: pwc.slopes,
                    intercepts: pwc.intercepts,
                    error,
                });
            }
            let report = LinearizeReport {
                m_segments,
                all_lower_approx: units.iter().all(|u| u.error.is_lower_approx),
                units,
            };
            serde_json::to_writer_pretty(&mut *out, &report)
                .map_err(|e| DedError::InvalidArgument(format!("cannot write report: {e}")))?;
            writeln!(out)?;
            Ok(0)
        }
        Command::Oracle {
            instance,
            m_segments,
            max_assignments,
            out: out_path,
        } => {
            let (inst, meta) = load(&instance)?;
            let (_, milp) = build(&inst, m_segments)?;
            let res = enumerate_solve(&milp, TinyLimits { max_assignments })?;
            let mut sm = SolveMetadata {
                name: meta.name,
                nodes: Some(res.nodes_processed),
                ..SolveMetadata::default()
            };
            sm.config.insert("m_segments".to_string(), m_segments.to_string());
            sm.config.insert("method".to_string(), "enumeration".to_string());
            fill_meta(&mut sm, &res);
            let schedule = match &res.incumbent {
                Some(x) => Some(extract_solution(&milp, x, &inst)?),
                None => None,
            };
            emit(out, out_path.as_deref(), &SolutionFile::new(&inst, schedule.as_ref(), sm)?)?;
            Ok(if res.status == BnbStatus::Infeasible { 1 } else { 0 })
        }
        Command::Duplicate { instance, k, out: path } => {
            let (inst, meta) = load(&instance)?;
            let dup = duplicate_system(&inst, k)?;
            let meta = Metadata {
                name: format!("{} x{k}", meta.name),
                source: meta.source,
            };
            write_instance(&dup, &meta, &path)?;
            writeln!(out, "wrote {} units to {}", dup.num_units(), path.display())?;
            Ok(0)
        }
        Command::Gen {
            seed,
            units,
            periods,
            out: path,
        } => {
            let inst = random_instance(seed, units, periods)?;
            let meta = Metadata {
                name: format!("random-{seed}-{units}x{periods}"),
                source: "generated".to_string(),
            };
            write_instance(&inst, &meta, &path)?;
            Ok(0)
        }
    }
}

fn fill_meta(sm: &mut SolveMetadata, res: &BnbResult) {
    sm.status = res.status.to_string();
    sm.nodes = Some(res.nodes_processed);
    sm.wall_time = Some(res.wall_time);
    if res.incumbent.is_some() {
        sm.milp_objective = Some(res.incumbent_obj);
        sm.rgap = Some(res.achieved_rgap);
    }
    if res.best_bound.is_finite() {
        sm.best_bound = Some(res.best_bound);
    }
}

#[derive(Serialize)]
struct UnitReport {
    unit: usize,
    num_segments: usize,
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
    error: ApproxErrorReport,
}

#[derive(Serialize)]
struct LinearizeReport {
    m_segments: usize,
    all_lower_approx: bool,
    units: Vec<UnitReport>,
}
