//! Plain-text solution files.
//!
//! ```text
//! # dispatch solution
//! name = ten-unit
//! status = gap-reached
//! true_cost = 1016533.4
//! best_bound = 1014112.9
//! config.rgap_target = 0.0025
//!
//! [outputs]
//! period       U1       U2
//!      1   150.00   222.27
//!      2   150.00   222.27
//! # unit 2 output is 222.27 MW in every period
//! ```
//!
//! Header values are written at full precision, outputs with two decimals.
//! Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{DedError, Result};
use crate::model::{optimality_gap, schedule_cost, Schedule, SystemInstance};

/// Solver facts recorded next to a schedule.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveMetadata {
    pub name: String,
    pub status: String,
    pub milp_objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub rgap: Option<f64>,
    pub wall_time: Option<f64>,
    pub nodes: Option<usize>,
    /// Settings echoed as `config.<key> = <value>`.
    pub config: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionFile {
    pub meta: SolveMetadata,
    /// Total true cost of the schedule.
    pub true_cost: Option<f64>,
    /// `(true_cost - best_bound) / best_bound`.
    pub ogap: Option<f64>,
    /// Outputs `[unit][period]` rounded to 0.01 MW; empty without a schedule.
    pub power: Vec<Vec<f64>>,
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

impl SolutionFile {
    /// Builds the file contents; the cost is evaluated on the unrounded
    /// schedule.
    pub fn new(inst: &SystemInstance, schedule: Option<&Schedule>, meta: SolveMetadata) -> Result<Self> {
        let Some(s) = schedule else {
            return Ok(SolutionFile {
                meta,
                ..SolutionFile::default()
            });
        };
        let cost = schedule_cost(inst, s)?;
        let ogap = match meta.best_bound {
            Some(lb) if lb > 0.0 && lb.is_finite() => Some(optimality_gap(cost, lb)?),
            _ => None,
        };
        Ok(SolutionFile {
            meta,
            true_cost: Some(cost),
            ogap,
            power: s.power.iter().map(|row| row.iter().map(|&v| round2(v)).collect()).collect(),
        })
    }

    pub fn schedule(&self) -> Option<Schedule> {
        (!self.power.is_empty()).then(|| Schedule::new(self.power.clone()))
    }
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub fn render_solution(sol: &SolutionFile) -> String {
    let m = &sol.meta;
    let mut out = String::from("# dispatch solution\n");
    let _ = writeln!(out, "name = {}", one_line(&m.name));
    let _ = writeln!(out, "status = {}", one_line(&m.status));
    let mut num = |key: &str, v: Option<f64>| {
        if let Some(v) = v {
            let _ = writeln!(out, "{key} = {v}");
        }
    };
    num("true_cost", sol.true_cost);
    num("milp_objective", m.milp_objective);
    num("best_bound", m.best_bound);
    num("rgap", m.rgap);
    num("ogap", sol.ogap);
    num("wall_time", m.wall_time);
    if let Some(n) = m.nodes {
        let _ = writeln!(out, "nodes = {n}");
    }
    for (k, v) in &m.config {
        let _ = writeln!(out, "config.{} = {}", one_line(k), one_line(v));
    }
    if sol.power.is_empty() {
        return out;
    }
    let periods = sol.power[0].len();
    out.push_str("\n[outputs]\nperiod");
    for i in 0..sol.power.len() {
        let _ = write!(out, " {:>8}", format!("U{}", i + 1));
    }
    out.push('\n');
    for t in 0..periods {
        let _ = write!(out, "{:>6}", t + 1);
        for row in &sol.power {
            let _ = write!(out, " {:>8.2}", row[t]);
        }
        out.push('\n');
    }
    if periods > 1 {
        for (i, row) in sol.power.iter().enumerate() {
            if row.iter().all(|&v| v == row[0]) {
                let _ = writeln!(out, "# unit {} output is {:.2} MW in every period", i + 1, row[0]);
            }
        }
    }
    out
}

pub fn parse_solution(text: &str) -> Result<SolutionFile> {
    let mut sol = SolutionFile::default();
    let mut in_outputs = false;
    let mut n_units = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| DedError::Parse { line: line_no, message };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[outputs]" {
            in_outputs = true;
            continue;
        }
        if !in_outputs {
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let float = |v: &str| v.parse::<f64>().map_err(|_| err(format!("bad number '{v}' for {key}")));
            match key {
                "name" => sol.meta.name = value.to_string(),
                "status" => sol.meta.status = value.to_string(),
                "true_cost" => sol.true_cost = Some(float(value)?),
                "milp_objective" => sol.meta.milp_objective = Some(float(value)?),
                "best_bound" => sol.meta.best_bound = Some(float(value)?),
                "rgap" => sol.meta.rgap = Some(float(value)?),
                "ogap" => sol.ogap = Some(float(value)?),
                "wall_time" => sol.meta.wall_time = Some(float(value)?),
                "nodes" => {
                    sol.meta.nodes = Some(value.parse().map_err(|_| err(format!("bad node count '{value}'")))?)
                }
                _ => match key.strip_prefix("config.") {
                    Some(k) => {
                        sol.meta.config.insert(k.to_string(), value.to_string());
                    }
                    None => return Err(err(format!("unknown key '{key}'"))),
                },
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let first = fields.next().unwrap_or_default();
        if n_units.is_none() {
            if first != "period" {
                return Err(err("expected the 'period U1 U2 ...' header".into()));
            }
            let names: Vec<&str> = fields.collect();
            for (i, name) in names.iter().enumerate() {
                if *name != format!("U{}", i + 1) {
                    return Err(err(format!("unexpected column '{name}'")));
                }
            }
            n_units = Some(names.len());
            continue;
        }
        let t: usize = first.parse().map_err(|_| err(format!("bad period '{first}'")))?;
        if t != rows.len() + 1 {
            return Err(err(format!("expected period {}, got {t}", rows.len() + 1)));
        }
        let values = fields
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(err(format!("bad output '{v}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if Some(values.len()) != n_units {
            return Err(err(format!("expected {} outputs, got {}", n_units.unwrap_or(0), values.len())));
        }
        rows.push(values);
    }
    if let Some(n) = n_units {
        sol.power = (0..n).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
    }
    Ok(sol)
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<SolutionFile> {
    parse_solution(&std::fs::read_to_string(path)?)
}

/// Writes a solution file for `schedule` (or a metadata-only file when the
/// solve produced none).
pub fn write_solution(
    inst: &SystemInstance,
    schedule: Option<&Schedule>,
    meta: SolveMetadata,
    path: impl AsRef<Path>,
) -> Result<SolutionFile> {
    let sol = SolutionFile::new(inst, schedule, meta)?;
    std::fs::write(path, render_solution(&sol))?;
    Ok(sol)
}
