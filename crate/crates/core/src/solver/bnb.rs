//! Branch-and-bound over binary columns.
//!
//! Nodes carry the list of binary fixings from the root plus the parent's
//! final basis; each node LP is re-optimized from that basis with the dual
//! simplex. The global bound is the minimum over open nodes, nodes being
//! processed, and nodes discarded because they were within the gap target.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::propagate::Propagator;
use super::simplex::{Basis, LpModel, LpOutcome, LpStatus, Simplex};
use super::{relative_gap, BnbResult, BnbStatus, BranchingRule, NodeSelection, SolverConfig};
use crate::error::Result;
use crate::milp::MilpInstance;

/// Absolute slack when comparing a node bound against the incumbent.
const ABS_PRUNE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TraceDecision {
    Branched { column: usize, value: f64 },
    Integral,
    Infeasible,
    PrunedByBound,
    NewIncumbent { objective: f64, source: String },
}

/// One line of the node trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub node: u64,
    pub parent: Option<u64>,
    pub depth: usize,
    /// LP bound of this node (`+inf` when infeasible).
    pub bound: f64,
    pub decision: TraceDecision,
    /// Global lower bound after the event.
    pub global_bound: f64,
    /// Incumbent objective after the event.
    pub incumbent: f64,
}

/// Writes the trace as line-delimited JSON.
pub fn write_trace<W: Write>(events: &[TraceEvent], mut out: W) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Node {
    id: u64,
    parent: Option<u64>,
    depth: usize,
    bound: f64,
    /// `(column, lower, upper)` fixings along the path from the root.
    fixings: Vec<(usize, f64, f64)>,
    basis: Option<Arc<Basis>>,
    /// Branch that created this node: column, direction, distance moved.
    branch: Option<(usize, bool, f64)>,
}

struct HeapEntry(Node);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: lower bound first, then older node.
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

struct Shared {
    open: BinaryHeap<HeapEntry>,
    /// Bound of the node each worker currently holds.
    active: Vec<Option<f64>>,
    incumbent: Option<Vec<f64>>,
    incumbent_obj: f64,
    /// Smallest bound among nodes dropped as within the gap target.
    dropped_floor: f64,
    last_bound: f64,
    next_id: u64,
    nodes: usize,
    stop: Option<BnbStatus>,
    trace: Vec<TraceEvent>,
    pseudo: PseudoCosts,
    /// Count of incumbent improvements.
    improvements: u64,
}

impl Shared {
    fn global_bound(&self) -> f64 {
        let mut lb = self.dropped_floor.min(self.incumbent_obj);
        if let Some(top) = self.open.peek() {
            lb = lb.min(top.0.bound);
        }
        for b in self.active.iter().flatten() {
            lb = lb.min(*b);
        }
        // Node bounds never decrease along a path, so this only guards
        // against round-off in the comparison above.
        lb.max(self.last_bound)
    }

    fn gap(&self) -> f64 {
        relative_gap(self.incumbent_obj, self.global_bound())
    }

    fn record(&mut self, cfg: &SolverConfig, node: &Node, bound: f64, decision: TraceDecision) {
        let gb = self.global_bound();
        self.last_bound = gb;
        if cfg.trace {
            self.trace.push(TraceEvent {
                node: node.id,
                parent: node.parent,
                depth: node.depth,
                bound,
                decision,
                global_bound: gb,
                incumbent: self.incumbent_obj,
            });
        }
    }

    fn offer(&mut self, cfg: &SolverConfig, node: &Node, x: Vec<f64>, obj: f64, source: &str) -> bool {
        if obj < self.incumbent_obj - 1e-9 * obj.abs().max(1.0) {
            self.incumbent = Some(x);
            self.incumbent_obj = obj;
            self.improvements += 1;
            self.record(
                cfg,
                node,
                obj,
                TraceDecision::NewIncumbent {
                    objective: obj,
                    source: source.to_string(),
                },
            );
            true
        } else {
            false
        }
    }

    /// Whether a node with this bound can be discarded.
    fn prunable(&self, bound: f64, cfg: &SolverConfig) -> bool {
        if !self.incumbent_obj.is_finite() {
            return false;
        }
        bound >= self.incumbent_obj - ABS_PRUNE_TOL
            || relative_gap(self.incumbent_obj, bound) <= cfg.rgap_target
    }

    fn discard(&mut self, bound: f64) {
        if bound < self.incumbent_obj - ABS_PRUNE_TOL {
            self.dropped_floor = self.dropped_floor.min(bound);
        }
    }
}

#[derive(Debug, Clone)]
struct PseudoCosts {
    down_sum: Vec<f64>,
    down_n: Vec<u32>,
    up_sum: Vec<f64>,
    up_n: Vec<u32>,
}

impl PseudoCosts {
    fn new(n: usize) -> Self {
        PseudoCosts {
            down_sum: vec![0.0; n],
            down_n: vec![0; n],
            up_sum: vec![0.0; n],
            up_n: vec![0; n],
        }
    }

    fn update(&mut self, col: usize, up: bool, frac_change: f64, gain: f64) {
        if frac_change <= 1e-9 || !gain.is_finite() {
            return;
        }
        let per_unit = gain.max(0.0) / frac_change;
        if up {
            self.up_sum[col] += per_unit;
            self.up_n[col] += 1;
        } else {
            self.down_sum[col] += per_unit;
            self.down_n[col] += 1;
        }
    }

    fn averages(&self) -> (f64, f64) {
        let avg = |s: &[f64], n: &[u32]| {
            let (tot, cnt) = s
                .iter()
                .zip(n)
                .filter(|(_, &c)| c > 0)
                .fold((0.0, 0u32), |(a, b), (v, &c)| (a + v / c as f64, b + 1));
            if cnt == 0 {
                1.0
            } else {
                tot / cnt as f64
            }
        };
        (avg(&self.down_sum, &self.down_n), avg(&self.up_sum, &self.up_n))
    }

    fn score(&self, col: usize, frac: f64, defaults: (f64, f64)) -> f64 {
        let down = if self.down_n[col] > 0 {
            self.down_sum[col] / self.down_n[col] as f64
        } else {
            defaults.0
        };
        let up = if self.up_n[col] > 0 {
            self.up_sum[col] / self.up_n[col] as f64
        } else {
            defaults.1
        };
        (down * frac).max(1e-6) * (up * (1.0 - frac)).max(1e-6)
    }
}

struct Context<'a> {
    milp: &'a MilpInstance,
    model: LpModel,
    prop: Propagator,
    cfg: &'a SolverConfig,
    root_lo: Vec<f64>,
    root_hi: Vec<f64>,
    binaries: Vec<usize>,
    /// Tie-break rank per column (lower wins).
    rank: Vec<usize>,
    start: Instant,
}

enum NodeLp {
    Infeasible,
    Cutoff,
    Solved(LpOutcome, Basis),
}

impl<'a> Context<'a> {
    fn node_bounds(&self, fixings: &[(usize, f64, f64)]) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut lo = self.root_lo.clone();
        let mut hi = self.root_hi.clone();
        let mut seeds = Vec::with_capacity(fixings.len());
        for &(j, l, u) in fixings {
            lo[j] = lo[j].max(l);
            hi[j] = hi[j].min(u);
            if lo[j] > hi[j] {
                return None;
            }
            seeds.push(j);
        }
        if !self.prop.run(&mut lo, &mut hi, Some(&seeds)) {
            return None;
        }
        Some((lo, hi))
    }

    fn solve_node(&self, lo: &[f64], hi: &[f64], warm: Option<&Basis>, cutoff: f64) -> NodeLp {
        let (l, u) = self.model.bounds(lo, hi);
        let mut s = Simplex::new(&self.model, l.clone(), u.clone(), warm);
        let mut out = s.solve(warm.is_some(), cutoff);
        if out.cutoff {
            return NodeLp::Cutoff;
        }
        if out.status == LpStatus::IterationLimit && warm.is_some() {
            s = Simplex::new(&self.model, l, u, None);
            out = s.solve(false, f64::INFINITY);
        }
        match out.status {
            LpStatus::Optimal => {
                let basis = s.basis();
                NodeLp::Solved(out, basis)
            }
            // An unbounded relaxation cannot happen with bounded binaries and
            // bounded dispatch columns; treat it like a failed node.
            _ => NodeLp::Infeasible,
        }
    }

    fn fractional(&self, x: &[f64]) -> Vec<(usize, f64)> {
        self.binaries
            .iter()
            .filter_map(|&j| {
                let f = x[j] - x[j].floor();
                (f > self.cfg.integrality_tol && f < 1.0 - self.cfg.integrality_tol).then_some((j, f))
            })
            .collect()
    }

    fn choose_branch(&self, fracs: &[(usize, f64)], pseudo: &PseudoCosts) -> (usize, f64) {
        let mut best: Option<(usize, f64, f64)> = None;
        let defaults = pseudo.averages();
        for &(j, f) in fracs {
            let score = match self.cfg.branching_rule {
                BranchingRule::MostFractional => f.min(1.0 - f),
                BranchingRule::PseudoCost => pseudo.score(j, f, defaults),
            };
            let better = match best {
                None => true,
                Some((bj, _, bs)) => {
                    score > bs + 1e-12 || ((score - bs).abs() <= 1e-12 && self.rank[j] < self.rank[bj])
                }
            };
            if better {
                best = Some((j, f, score));
            }
        }
        let (j, f, _) = best.expect("called with at least one fractional column");
        (j, f)
    }

    /// Fixes one segment per group around the LP point and re-solves.
    fn round_and_repair(&self, x: &[f64], lo: &[f64], hi: &[f64], warm: &Basis) -> Option<(Vec<f64>, f64)> {
        let mut lo = lo.to_vec();
        let mut hi = hi.to_vec();
        let mut seeds = Vec::new();
        if self.milp.groups.is_empty() {
            for &j in &self.binaries {
                let v = x[j].round().clamp(lo[j], hi[j]);
                lo[j] = v;
                hi[j] = v;
                seeds.push(j);
            }
        } else {
            for g in &self.milp.groups {
                let p = x[g.power_col];
                let a = &g.breakpoints;
                let mut pick: Option<(usize, f64, f64)> = None;
                for (l, &u) in g.binary_cols.iter().enumerate() {
                    if hi[u] < 0.5 {
                        continue;
                    }
                    let dist = if p < a[l] {
                        a[l] - p
                    } else if p > a[l + 1] {
                        p - a[l + 1]
                    } else {
                        0.0
                    };
                    let better = match pick {
                        None => true,
                        Some((_, d, w)) => dist < d - 1e-9 || (dist <= d + 1e-9 && x[u] > w),
                    };
                    if better {
                        pick = Some((l, dist, x[u]));
                    }
                }
                let (chosen, _, _) = pick?;
                for (l, &u) in g.binary_cols.iter().enumerate() {
                    let v = if l == chosen { 1.0 } else { 0.0 };
                    if v < lo[u] || v > hi[u] {
                        return None;
                    }
                    lo[u] = v;
                    hi[u] = v;
                    seeds.push(u);
                }
            }
        }
        if !self.prop.run(&mut lo, &mut hi, Some(&seeds)) {
            return None;
        }
        match self.solve_node(&lo, &hi, Some(warm), f64::INFINITY) {
            NodeLp::Solved(out, _) if self.fractional(&out.x).is_empty() => {
                let obj = self.milp.objective_value(&out.x);
                Some((out.x, obj))
            }
            _ => None,
        }
    }

    fn out_of_time(&self) -> bool {
        self.start.elapsed().as_secs_f64() >= self.cfg.time_limit
    }
}

/// Branch-and-bound with relative-gap termination.
pub fn solve_milp(milp: &MilpInstance, cfg: &SolverConfig) -> Result<BnbResult> {
    milp.validate()?;
    cfg.validate()?;
    let start = Instant::now();
    let binaries: Vec<usize> = (0..milp.num_cols).filter(|&j| milp.is_binary[j]).collect();
    let mut rank: Vec<usize> = (0..milp.num_cols).collect();
    if cfg.seed != 0 {
        let mut order: Vec<usize> = (0..milp.num_cols).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
        for (r, &j) in order.iter().enumerate() {
            rank[j] = r;
        }
    }
    let prop = Propagator::new(milp);
    let mut root_lo = milp.lower.clone();
    let mut root_hi = milp.upper.clone();
    let root_ok = prop.run(&mut root_lo, &mut root_hi, None);
    let ctx = Context {
        milp,
        model: LpModel::from_milp(milp),
        prop,
        cfg,
        root_lo,
        root_hi,
        binaries,
        rank,
        start,
    };

    let shared = Mutex::new(Shared {
        open: BinaryHeap::new(),
        active: vec![None; cfg.threads],
        incumbent: None,
        incumbent_obj: f64::INFINITY,
        dropped_floor: f64::INFINITY,
        last_bound: f64::NEG_INFINITY,
        next_id: 1,
        nodes: 0,
        stop: None,
        trace: Vec::new(),
        pseudo: PseudoCosts::new(milp.num_cols),
        improvements: 0,
    });
    let wake = Condvar::new();

    if root_ok {
        let root = Node {
            id: 0,
            parent: None,
            depth: 0,
            bound: f64::NEG_INFINITY,
            fixings: Vec::new(),
            basis: None,
            branch: None,
        };
        shared.lock().unwrap().open.push(HeapEntry(root));
        if cfg.threads == 1 {
            worker(&ctx, &shared, &wake, 0);
        } else {
            std::thread::scope(|scope| {
                for w in 0..cfg.threads {
                    let (ctx, shared, wake) = (&ctx, &shared, &wake);
                    scope.spawn(move || worker(ctx, shared, wake, w));
                }
            });
        }
    }

    let sh = shared.into_inner().unwrap();
    let best_bound = sh.global_bound();
    // Every node left behind is provably no better than the incumbent.
    let proven = sh.incumbent_obj.is_finite()
        && sh.dropped_floor == f64::INFINITY
        && sh.open.iter().all(|e| e.0.bound >= sh.incumbent_obj - ABS_PRUNE_TOL);
    let status = match (&sh.incumbent, sh.stop) {
        (None, Some(s @ (BnbStatus::TimeLimit | BnbStatus::NodeLimit))) => s,
        (None, _) => BnbStatus::Infeasible,
        (Some(_), Some(s @ (BnbStatus::TimeLimit | BnbStatus::NodeLimit))) => {
            if sh.gap() <= cfg.rgap_target {
                BnbStatus::GapReached
            } else {
                s
            }
        }
        (Some(_), _) if proven => BnbStatus::Optimal,
        (Some(_), _) => BnbStatus::GapReached,
    };
    let (best_bound, achieved) = match sh.incumbent {
        Some(_) => (best_bound, relative_gap(sh.incumbent_obj, best_bound)),
        None if status == BnbStatus::Infeasible => (f64::INFINITY, f64::INFINITY),
        None => (best_bound, f64::INFINITY),
    };
    Ok(BnbResult {
        status,
        incumbent: sh.incumbent,
        incumbent_obj: sh.incumbent_obj,
        best_bound,
        achieved_rgap: achieved.max(0.0),
        nodes_processed: sh.nodes,
        wall_time: start.elapsed().as_secs_f64(),
        trace: sh.trace,
    })
}

fn worker(ctx: &Context<'_>, shared: &Mutex<Shared>, wake: &Condvar, me: usize) {
    let cfg = ctx.cfg;
    let mut held: Option<Node> = None;
    // Best-bound search dives until the first incumbent and again after
    // every improvement.
    let mut seen = 0u64;
    let mut diving = false;
    loop {
        // Acquire a node.
        let node = match held.take() {
            Some(n) => n,
            None => {
                let mut sh = shared.lock().unwrap();
                loop {
                    if sh.stop.is_some() {
                        sh.active[me] = None;
                        wake.notify_all();
                        return;
                    }
                    if sh.incumbent.is_some() && sh.gap() <= cfg.rgap_target {
                        sh.stop = Some(BnbStatus::GapReached);
                        continue;
                    }
                    if let Some(HeapEntry(n)) = sh.open.pop() {
                        if sh.prunable(n.bound, cfg) {
                            sh.discard(n.bound);
                            let b = n.bound;
                            sh.record(cfg, &n, b, TraceDecision::PrunedByBound);
                            continue;
                        }
                        sh.active[me] = Some(n.bound);
                        break n;
                    }
                    if sh.active.iter().all(Option::is_none) {
                        sh.stop = Some(BnbStatus::Optimal);
                        wake.notify_all();
                        return;
                    }
                    sh = wake.wait(sh).unwrap();
                }
            }
        };

        {
            let mut sh = shared.lock().unwrap();
            if ctx.out_of_time() {
                sh.stop.get_or_insert(BnbStatus::TimeLimit);
            } else if sh.nodes >= cfg.node_limit {
                sh.stop.get_or_insert(BnbStatus::NodeLimit);
            }
            if sh.stop.is_some() {
                // Keep the node's bound in the global bound.
                sh.open.push(HeapEntry(node));
                sh.active[me] = None;
                wake.notify_all();
                return;
            }
            sh.nodes += 1;
        }

        let children = process(ctx, shared, &node);

        let mut sh = shared.lock().unwrap();
        let mut children = children.into_iter();
        let plunge = match cfg.node_selection {
            NodeSelection::DepthFirstPlunge => true,
            NodeSelection::BestBound => {
                if sh.improvements != seen {
                    seen = sh.improvements;
                    diving = true;
                }
                sh.incumbent.is_none() || diving
            }
        };
        if plunge {
            held = children.next();
        }
        for c in children {
            sh.open.push(HeapEntry(c));
        }
        sh.active[me] = held.as_ref().map(|n| n.bound);
        if let Some(h) = &held {
            if sh.prunable(h.bound, cfg) {
                let b = h.bound;
                sh.discard(b);
                let h = held.take().unwrap();
                sh.record(cfg, &h, b, TraceDecision::PrunedByBound);
                sh.active[me] = None;
            }
        }
        diving &= held.is_some();
        wake.notify_all();
    }
}

/// Solves one node and returns its children, preferred child first.
fn process(ctx: &Context<'_>, shared: &Mutex<Shared>, node: &Node) -> Vec<Node> {
    let cfg = ctx.cfg;
    let Some((lo, hi)) = ctx.node_bounds(&node.fixings) else {
        let mut sh = shared.lock().unwrap();
        sh.record(cfg, node, f64::INFINITY, TraceDecision::Infeasible);
        return Vec::new();
    };
    let cutoff = {
        let sh = shared.lock().unwrap();
        if sh.incumbent_obj.is_finite() {
            sh.incumbent_obj - ABS_PRUNE_TOL
        } else {
            f64::INFINITY
        }
    };
    let (out, basis) = match ctx.solve_node(&lo, &hi, node.basis.as_deref(), cutoff) {
        NodeLp::Solved(out, basis) => (out, basis),
        NodeLp::Infeasible => {
            let mut sh = shared.lock().unwrap();
            sh.record(cfg, node, f64::INFINITY, TraceDecision::Infeasible);
            return Vec::new();
        }
        NodeLp::Cutoff => {
            let mut sh = shared.lock().unwrap();
            sh.record(cfg, node, f64::INFINITY, TraceDecision::PrunedByBound);
            return Vec::new();
        }
    };
    let bound = out.objective.max(node.bound);

    {
        let mut sh = shared.lock().unwrap();
        if let Some((col, up, dist)) = node.branch {
            sh.pseudo.update(col, up, dist, bound - node.bound);
        }
        if sh.prunable(bound, cfg) {
            sh.discard(bound);
            sh.record(cfg, node, bound, TraceDecision::PrunedByBound);
            return Vec::new();
        }
    }

    let fracs = ctx.fractional(&out.x);
    if fracs.is_empty() {
        let mut sh = shared.lock().unwrap();
        let obj = ctx.milp.objective_value(&out.x);
        sh.offer(cfg, node, out.x.clone(), obj, "lp");
        sh.record(cfg, node, bound, TraceDecision::Integral);
        return Vec::new();
    }

    if cfg.heuristic {
        if let Some((x, obj)) = ctx.round_and_repair(&out.x, &lo, &hi, &basis) {
            let mut sh = shared.lock().unwrap();
            sh.offer(cfg, node, x, obj, "rounding");
            if sh.prunable(bound, cfg) {
                sh.discard(bound);
                sh.record(cfg, node, bound, TraceDecision::PrunedByBound);
                return Vec::new();
            }
        }
    }

    let (col, frac) = {
        let sh = shared.lock().unwrap();
        ctx.choose_branch(&fracs, &sh.pseudo)
    };
    let basis = Arc::new(basis);
    let mut sh = shared.lock().unwrap();
    sh.record(cfg, node, bound, TraceDecision::Branched { column: col, value: out.x[col] });
    let mut make = |value: f64| {
        let id = sh.next_id;
        sh.next_id += 1;
        let mut fixings = node.fixings.clone();
        fixings.push((col, value, value));
        let up = value > 0.5;
        Node {
            id,
            parent: Some(node.id),
            depth: node.depth + 1,
            bound,
            fixings,
            basis: Some(basis.clone()),
            branch: Some((col, up, if up { 1.0 - frac } else { frac })),
        }
    };
    let mut kids = vec![make(1.0), make(0.0)];
    if frac < 0.5 {
        kids.swap(0, 1);
    }
    kids
}
