//! Built-in MILP solver: bounded simplex LP relaxations inside a
//! branch-and-bound search over the binary columns.

mod bnb;
mod lu;
mod propagate;
mod simplex;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DedError, Result};
use crate::milp::MilpInstance;

pub use bnb::{solve_milp, write_trace, TraceDecision, TraceEvent};
pub use simplex::LpStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchingRule {
    MostFractional,
    PseudoCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSelection {
    /// Lowest bound first; dives only until the first incumbent exists.
    BestBound,
    /// Dives into a child after every branching, returning to the lowest
    /// bound once the dive is fathomed.
    DepthFirstPlunge,
}

impl FromStr for BranchingRule {
    type Err = DedError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "most-fractional" => Ok(BranchingRule::MostFractional),
            "pseudo-cost" => Ok(BranchingRule::PseudoCost),
            _ => Err(DedError::InvalidArgument(format!("unknown branching rule '{s}'"))),
        }
    }
}

impl FromStr for NodeSelection {
    type Err = DedError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best-bound" => Ok(NodeSelection::BestBound),
            "depth-first-plunge" => Ok(NodeSelection::DepthFirstPlunge),
            _ => Err(DedError::InvalidArgument(format!("unknown node selection '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once `(incumbent - bound) / |bound|` reaches this value.
    pub rgap_target: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    pub node_limit: usize,
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    pub branching_rule: BranchingRule,
    pub node_selection: NodeSelection,
    /// Zero keeps lowest-index tie-breaking; other values permute ties.
    pub seed: u64,
    pub threads: usize,
    /// Segment-rounding primal heuristic at each node.
    pub heuristic: bool,
    /// Record a per-node event trace in the result.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rgap_target: 0.0025,
            time_limit: f64::INFINITY,
            node_limit: usize::MAX,
            feasibility_tol: 1e-6,
            integrality_tol: 1e-6,
            branching_rule: BranchingRule::MostFractional,
            node_selection: NodeSelection::BestBound,
            seed: 0,
            threads: 1,
            heuristic: true,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rgap_target >= 0.0) {
            return Err(DedError::InvalidArgument("rgap_target must be >= 0".into()));
        }
        if !(self.feasibility_tol > 0.0 && self.integrality_tol > 0.0) {
            return Err(DedError::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.time_limit > 0.0) {
            return Err(DedError::InvalidArgument("time limit must be positive".into()));
        }
        if self.threads == 0 {
            return Err(DedError::InvalidArgument("need at least one thread".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Lagrangian bound from the final duals; equals the objective at optimality.
    pub dual_objective: f64,
    pub iterations: usize,
}

/// Per-column bound override for [`solve_lp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOverride {
    pub col: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Solves the LP relaxation of `milp` (binary flags ignored).
pub fn solve_lp(milp: &MilpInstance, overrides: &[BoundOverride]) -> Result<LpSolution> {
    milp.validate()?;
    let mut lo = milp.lower.clone();
    let mut hi = milp.upper.clone();
    for o in overrides {
        if o.col >= milp.num_cols {
            return Err(DedError::InvalidArgument(format!("override on column {} out of range", o.col)));
        }
        if o.lower < milp.lower[o.col] || o.upper > milp.upper[o.col] || o.lower > o.upper {
            return Err(DedError::InvalidArgument(format!(
                "override [{}, {}] on {} is not within the column bounds",
                o.lower,
                o.upper,
                milp.column_name(o.col)
            )));
        }
        lo[o.col] = o.lower;
        hi[o.col] = o.upper;
    }
    let model = simplex::LpModel::from_milp(milp);
    let (l, u) = model.bounds(&lo, &hi);
    let mut s = simplex::Simplex::new(&model, l, u, None);
    let out = s.solve(false, f64::INFINITY);
    Ok(LpSolution {
        status: out.status,
        x: out.x,
        objective: out.objective,
        dual_objective: out.dual_objective,
        iterations: out.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BnbStatus {
    GapReached,
    Optimal,
    TimeLimit,
    NodeLimit,
    Infeasible,
}

impl fmt::Display for BnbStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BnbStatus::GapReached => "gap-reached",
            BnbStatus::Optimal => "optimal",
            BnbStatus::TimeLimit => "time-limit",
            BnbStatus::NodeLimit => "node-limit",
            BnbStatus::Infeasible => "infeasible",
        })
    }
}

impl FromStr for BnbStatus {
    type Err = DedError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gap-reached" => Ok(BnbStatus::GapReached),
            "optimal" => Ok(BnbStatus::Optimal),
            "time-limit" => Ok(BnbStatus::TimeLimit),
            "node-limit" => Ok(BnbStatus::NodeLimit),
            "infeasible" => Ok(BnbStatus::Infeasible),
            _ => Err(DedError::InvalidArgument(format!("unknown status '{s}'"))),
        }
    }
}

impl LpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration-limit",
        }
    }
}

impl Serialize for LpStatus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LpStatus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "optimal" => Ok(LpStatus::Optimal),
            "infeasible" => Ok(LpStatus::Infeasible),
            "unbounded" => Ok(LpStatus::Unbounded),
            "iteration-limit" => Ok(LpStatus::IterationLimit),
            other => Err(serde::de::Error::custom(format!("unknown LP status {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub incumbent: Option<Vec<f64>>,
    /// MILP objective of the incumbent; `+inf` without one.
    pub incumbent_obj: f64,
    pub best_bound: f64,
    pub achieved_rgap: f64,
    pub nodes_processed: usize,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
}

/// Relative gap with the lower bound in the denominator.
pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    (incumbent - bound) / bound.abs().max(1e-10)
}
