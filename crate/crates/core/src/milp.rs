//! Assembly of the segment-binary dispatch MILP and mapping back to schedules.
//!
//! Column layout, in order:
//! 1. `P[i,t]` for every period `t` and unit `i`;
//! 2. per `(t, i)`: the segment outputs `PS[i,t,l]` followed by the segment
//!    binaries `U[i,t,l]`;
//! 3. `SR[r,i,t]` for every reserve product, period, and unit.
//!
//! Rows keep their `<=`/`=`/`>=` sense as written.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DedError, Result};
use crate::linearize::PiecewiseCost;
use crate::model::{Schedule, SystemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    /// Sparse `(column, coefficient)` terms; columns are distinct.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Role of a column in the dispatch model (indices are 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnKey {
    Power { unit: usize, period: usize },
    Segment { unit: usize, period: usize, segment: usize },
    Binary { unit: usize, period: usize, segment: usize },
    Reserve { product: usize, unit: usize, period: usize },
    /// Column of a model not produced by [`build_milp`].
    Generic(usize),
}

impl fmt::Display for ColumnKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ColumnKey::Power { unit, period } => write!(f, "P[{},{}]", unit + 1, period + 1),
            ColumnKey::Segment {
                unit,
                period,
                segment,
            } => write!(f, "PS[{},{},{}]", unit + 1, period + 1, segment + 1),
            ColumnKey::Binary {
                unit,
                period,
                segment,
            } => write!(f, "U[{},{},{}]", unit + 1, period + 1, segment + 1),
            ColumnKey::Reserve {
                product,
                unit,
                period,
            } => write!(f, "SR[{},{},{}]", product + 1, unit + 1, period + 1),
            ColumnKey::Generic(j) => write!(f, "x{}", j + 1),
        }
    }
}

/// One unit-period's segment structure: `P = Σ PS_l`, `Σ U_l = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentGroup {
    pub power_col: usize,
    pub segment_cols: Vec<usize>,
    pub binary_cols: Vec<usize>,
    pub breakpoints: Vec<f64>,
}

/// A sparse MILP with explicit row senses and binary columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpInstance {
    pub name: String,
    pub num_cols: usize,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub is_binary: Vec<bool>,
    pub rows: Vec<Row>,
    /// Column index to model role; a bijection onto `0..num_cols`.
    pub column_map: Vec<ColumnKey>,
    /// Segment structure per unit-period, used by the solver's heuristics.
    pub groups: Vec<SegmentGroup>,
    /// Periods (0-based) where demand lies outside `[Σ p_min, Σ p_max]`.
    pub infeasible_periods: Vec<usize>,
}

impl MilpInstance {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn column_name(&self, j: usize) -> String {
        self.column_map[j].to_string()
    }

    /// Reverse lookup of [`MilpInstance::column_map`].
    pub fn column_index(&self) -> HashMap<ColumnKey, usize> {
        self.column_map
            .iter()
            .enumerate()
            .map(|(j, k)| (*k, j))
            .collect()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = (0..self.num_cols)
            .map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max);
        self.rows
            .iter()
            .map(|r| r.violation(x))
            .fold(bounds, f64::max)
    }

    /// Largest distance of a binary column from {0, 1}.
    pub fn max_fractionality(&self, x: &[f64]) -> f64 {
        (0..self.num_cols)
            .filter(|&j| self.is_binary[j])
            .map(|j| (x[j] - x[j].round()).abs())
            .fold(0.0, f64::max)
    }

    /// Structural checks: sizes, binary bounds, row column indices.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_cols;
        if [
            self.objective.len(),
            self.lower.len(),
            self.upper.len(),
            self.is_binary.len(),
            self.column_map.len(),
        ]
        .iter()
        .any(|&len| len != n)
        {
            return Err(DedError::Dimension("column arrays must all have num_cols entries".into()));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] || self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(DedError::InvalidInstance(format!(
                    "column {} has bounds [{}, {}]",
                    self.column_name(j),
                    self.lower[j],
                    self.upper[j]
                )));
            }
            if self.is_binary[j] && (self.lower[j] < 0.0 || self.upper[j] > 1.0) {
                return Err(DedError::InvalidInstance(format!(
                    "binary column {} has bounds outside [0, 1]",
                    self.column_name(j)
                )));
            }
        }
        for row in &self.rows {
            let mut seen = std::collections::HashSet::new();
            for &(j, a) in &row.terms {
                if j >= n || !seen.insert(j) || !a.is_finite() {
                    return Err(DedError::InvalidInstance(format!(
                        "row {} has a bad or duplicate term on column {j}",
                        row.name
                    )));
                }
            }
            if !row.rhs.is_finite() {
                return Err(DedError::InvalidInstance(format!("row {} has non-finite rhs", row.name)));
            }
        }
        Ok(())
    }
}

/// Builds the dispatch MILP for `instance` from one linearization per unit.
pub fn build_milp(instance: &SystemInstance, pwcs: &[PiecewiseCost]) -> Result<MilpInstance> {
    let n = instance.num_units();
    let horizon = instance.horizon;
    if pwcs.len() != n {
        return Err(DedError::Dimension(format!(
            "{} linearizations for {n} units",
            pwcs.len()
        )));
    }
    for (u, p) in instance.units.iter().zip(pwcs) {
        let first = p.breakpoints[0];
        let last = p.breakpoints[p.breakpoints.len() - 1];
        if p.unit_id != u.id || first != u.p_min || last != u.p_max {
            return Err(DedError::Dimension(format!(
                "linearization for unit {} does not match unit {}",
                p.unit_id, u.id
            )));
        }
    }

    let mut b = Builder::default();
    let mut power: Vec<Vec<usize>> = vec![Vec::with_capacity(horizon); n];
    for t in 0..horizon {
        for (i, unit) in instance.units.iter().enumerate() {
            let j = b.col(ColumnKey::Power { unit: i, period: t }, unit.p_min, unit.p_max, 0.0, false);
            power[i].push(j);
        }
    }

    let mut groups = Vec::with_capacity(n * horizon);
    for t in 0..horizon {
        for (i, pwc) in pwcs.iter().enumerate() {
            let a = &pwc.breakpoints;
            let mut seg_cols = Vec::with_capacity(pwc.num_segments);
            let mut bin_cols = Vec::with_capacity(pwc.num_segments);
            for l in 0..pwc.num_segments {
                let (unit, period, segment) = (i, t, l);
                seg_cols.push(b.col(
                    ColumnKey::Segment { unit, period, segment },
                    0.0,
                    a[l + 1],
                    pwc.slopes[l],
                    false,
                ));
                bin_cols.push(b.col(
                    ColumnKey::Binary { unit, period, segment },
                    0.0,
                    1.0,
                    pwc.intercepts[l],
                    true,
                ));
            }
            groups.push(SegmentGroup {
                power_col: power[i][t],
                segment_cols: seg_cols,
                binary_cols: bin_cols,
                breakpoints: a.clone(),
            });
        }
    }

    let mut reserve_cols = Vec::with_capacity(instance.reserves.len());
    for (r, prod) in instance.reserves.iter().enumerate() {
        let mut by_unit: Vec<Vec<usize>> = vec![Vec::with_capacity(horizon); n];
        for t in 0..horizon {
            for (i, unit) in instance.units.iter().enumerate() {
                let j = b.col(
                    ColumnKey::Reserve { product: r, unit: i, period: t },
                    0.0,
                    prod.tau * unit.ramp_up,
                    0.0,
                    false,
                );
                by_unit[i].push(j);
            }
        }
        reserve_cols.push(by_unit);
    }

    // Segment linking rows, per unit-period.
    for g in &groups {
        let ColumnKey::Power { unit, period } = b.keys[g.power_col] else {
            unreachable!("group power column is a power column");
        };
        let tag = format!("{},{}", unit + 1, period + 1);
        let mut coupling = vec![(g.power_col, 1.0)];
        coupling.extend(g.segment_cols.iter().map(|&j| (j, -1.0)));
        b.row(format!("link[{tag}]"), coupling, Sense::Eq, 0.0);
        for l in 0..g.segment_cols.len() {
            let (ps, u) = (g.segment_cols[l], g.binary_cols[l]);
            b.row(
                format!("segub[{tag},{}]", l + 1),
                vec![(ps, 1.0), (u, -g.breakpoints[l + 1])],
                Sense::Le,
                0.0,
            );
            b.row(
                format!("seglb[{tag},{}]", l + 1),
                vec![(ps, 1.0), (u, -g.breakpoints[l])],
                Sense::Ge,
                0.0,
            );
        }
        b.row(
            format!("pick[{tag}]"),
            g.binary_cols.iter().map(|&j| (j, 1.0)).collect(),
            Sense::Eq,
            1.0,
        );
    }

    for t in 0..horizon {
        b.row(
            format!("balance[{}]", t + 1),
            (0..n).map(|i| (power[i][t], 1.0)).collect(),
            Sense::Eq,
            instance.demand[t],
        );
    }

    for (i, unit) in instance.units.iter().enumerate() {
        for t in 0..horizon {
            let tag = format!("{},{}", i + 1, t + 1);
            if t == 0 {
                if let Some(p0) = unit.initial_power {
                    let j = power[i][0];
                    b.row(format!("rampup[{tag}]"), vec![(j, 1.0)], Sense::Le, p0 + unit.ramp_up);
                    b.row(format!("rampdn[{tag}]"), vec![(j, 1.0)], Sense::Ge, p0 - unit.ramp_down);
                }
                continue;
            }
            let terms = vec![(power[i][t], 1.0), (power[i][t - 1], -1.0)];
            b.row(format!("rampup[{tag}]"), terms.clone(), Sense::Le, unit.ramp_up);
            b.row(format!("rampdn[{tag}]"), terms, Sense::Ge, -unit.ramp_down);
        }
    }

    for (r, prod) in instance.reserves.iter().enumerate() {
        for t in 0..horizon {
            for (i, unit) in instance.units.iter().enumerate() {
                b.row(
                    format!("srcap[{},{},{}]", r + 1, i + 1, t + 1),
                    vec![(reserve_cols[r][i][t], 1.0), (power[i][t], 1.0)],
                    Sense::Le,
                    unit.p_max,
                );
            }
            b.row(
                format!("srreq[{},{}]", r + 1, t + 1),
                (0..n).map(|i| (reserve_cols[r][i][t], 1.0)).collect(),
                Sense::Ge,
                prod.requirement[t],
            );
        }
    }

    Ok(MilpInstance {
        name: "dispatch".into(),
        num_cols: b.keys.len(),
        objective: b.objective,
        lower: b.lower,
        upper: b.upper,
        is_binary: b.is_binary,
        rows: b.rows,
        column_map: b.keys,
        groups,
        infeasible_periods: instance.static_infeasibility(),
    })
}

#[derive(Default)]
struct Builder {
    keys: Vec<ColumnKey>,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    is_binary: Vec<bool>,
    rows: Vec<Row>,
}

impl Builder {
    fn col(&mut self, key: ColumnKey, lo: f64, hi: f64, cost: f64, binary: bool) -> usize {
        self.keys.push(key);
        self.lower.push(lo);
        self.upper.push(hi);
        self.objective.push(cost);
        self.is_binary.push(binary);
        self.keys.len() - 1
    }

    fn row(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row {
            name,
            terms,
            sense,
            rhs,
        });
    }
}

/// Reads unit outputs and reserves out of a column vector.
pub fn extract_solution(milp: &MilpInstance, x: &[f64], instance: &SystemInstance) -> Result<Schedule> {
    if x.len() != milp.num_cols {
        return Err(DedError::Dimension(format!(
            "solution has {} entries, model has {} columns",
            x.len(),
            milp.num_cols
        )));
    }
    let n = instance.num_units();
    let horizon = instance.horizon;
    let mut power = vec![vec![f64::NAN; horizon]; n];
    let mut reserve = vec![vec![vec![0.0; horizon]; n]; instance.reserves.len()];
    for (j, key) in milp.column_map.iter().enumerate() {
        match *key {
            ColumnKey::Power { unit, period } if unit < n && period < horizon => {
                power[unit][period] = x[j];
            }
            ColumnKey::Reserve {
                product,
                unit,
                period,
            } if product < reserve.len() && unit < n && period < horizon => {
                reserve[product][unit][period] = x[j];
            }
            _ => {}
        }
    }
    if power.iter().flatten().any(|v| v.is_nan()) {
        return Err(DedError::Dimension(
            "model does not carry a power column for every unit-period".into(),
        ));
    }
    Ok(Schedule { power, reserve })
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => f64::from_str(s).map_err(|_| DedError::Parse {
            line,
            message: format!("bad number '{s}'"),
        }),
    }
}

/// Writes the plain-text interchange form.
///
/// ```text
/// MILP <name>
/// COLUMNS <n>
/// <index> <name> <lower> <upper> <C|B> <objective>
/// ROWS <m>
/// <index> <name> <L|E|G> <rhs> <nterms> <col>:<coef> ...
/// END
/// ```
/// Indices are 0-based, bounds may be `inf`/`-inf`, numbers use shortest
/// round-trip formatting so the text reproduces the model exactly.
pub fn write_interchange(milp: &MilpInstance) -> String {
    let mut out = String::new();
    writeln!(out, "MILP {}", milp.name).unwrap();
    writeln!(out, "COLUMNS {}", milp.num_cols).unwrap();
    for j in 0..milp.num_cols {
        writeln!(
            out,
            "{j} {} {} {} {} {}",
            milp.column_name(j),
            fmt_num(milp.lower[j]),
            fmt_num(milp.upper[j]),
            if milp.is_binary[j] { "B" } else { "C" },
            fmt_num(milp.objective[j])
        )
        .unwrap();
    }
    writeln!(out, "ROWS {}", milp.rows.len()).unwrap();
    for (i, row) in milp.rows.iter().enumerate() {
        let sense = match row.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        write!(out, "{i} {} {sense} {} {}", row.name, fmt_num(row.rhs), row.terms.len()).unwrap();
        for &(j, a) in &row.terms {
            write!(out, " {j}:{}", fmt_num(a)).unwrap();
        }
        out.push('\n');
    }
    out.push_str("END\n");
    out
}

/// Parses the interchange form produced by [`write_interchange`].
///
/// Column roles are read back from the names; segment groups are not
/// reconstructed.
pub fn read_interchange(text: &str) -> Result<MilpInstance> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let err = |line, message: &str| DedError::Parse {
        line,
        message: message.to_string(),
    };
    let mut next = || lines.find(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = next().ok_or_else(|| err(1, "empty model"))?;
    let name = header
        .strip_prefix("MILP")
        .ok_or_else(|| err(ln, "expected 'MILP <name>'"))?
        .trim()
        .to_string();
    let (ln, cols) = next().ok_or_else(|| err(ln, "missing COLUMNS"))?;
    let n: usize = cols
        .strip_prefix("COLUMNS")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| err(ln, "expected 'COLUMNS <n>'"))?;
    let mut milp = MilpInstance {
        name,
        num_cols: n,
        objective: Vec::with_capacity(n),
        lower: Vec::with_capacity(n),
        upper: Vec::with_capacity(n),
        is_binary: Vec::with_capacity(n),
        rows: Vec::new(),
        column_map: Vec::with_capacity(n),
        groups: Vec::new(),
        infeasible_periods: Vec::new(),
    };
    for j in 0..n {
        let (ln, l) = next().ok_or_else(|| err(0, "truncated COLUMNS section"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 6 || f[0].parse::<usize>().ok() != Some(j) {
            return Err(err(ln, "expected '<index> <name> <lower> <upper> <C|B> <objective>'"));
        }
        milp.column_map.push(parse_column_key(f[1]).unwrap_or(ColumnKey::Generic(j)));
        milp.lower.push(parse_num(f[2], ln)?);
        milp.upper.push(parse_num(f[3], ln)?);
        milp.is_binary.push(match f[4] {
            "B" => true,
            "C" => false,
            _ => return Err(err(ln, "column type must be C or B")),
        });
        milp.objective.push(parse_num(f[5], ln)?);
    }
    let (ln, rows) = next().ok_or_else(|| err(0, "missing ROWS"))?;
    let m: usize = rows
        .strip_prefix("ROWS")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| err(ln, "expected 'ROWS <m>'"))?;
    for i in 0..m {
        let (ln, l) = next().ok_or_else(|| err(0, "truncated ROWS section"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() < 5 || f[0].parse::<usize>().ok() != Some(i) {
            return Err(err(ln, "expected '<index> <name> <L|E|G> <rhs> <nterms> terms...'"));
        }
        let sense = match f[2] {
            "L" => Sense::Le,
            "E" => Sense::Eq,
            "G" => Sense::Ge,
            _ => return Err(err(ln, "row sense must be L, E or G")),
        };
        let rhs = parse_num(f[3], ln)?;
        let k: usize = f[4].parse().map_err(|_| err(ln, "bad term count"))?;
        if f.len() != 5 + k {
            return Err(err(ln, "term count does not match"));
        }
        let mut terms = Vec::with_capacity(k);
        for t in &f[5..] {
            let (c, a) = t.split_once(':').ok_or_else(|| err(ln, "term must be <col>:<coef>"))?;
            let c: usize = c.parse().map_err(|_| err(ln, "bad column index"))?;
            terms.push((c, parse_num(a, ln)?));
        }
        milp.rows.push(Row {
            name: f[1].to_string(),
            terms,
            sense,
            rhs,
        });
    }
    match next() {
        Some((_, "END")) => {}
        Some((ln, _)) => return Err(err(ln, "expected END")),
        None => return Err(err(0, "missing END")),
    }
    milp.validate()?;
    Ok(milp)
}

fn parse_column_key(name: &str) -> Option<ColumnKey> {
    let (kind, rest) = name.split_once('[')?;
    let idx: Vec<usize> = rest
        .strip_suffix(']')?
        .split(',')
        .map(|s| s.parse::<usize>().ok().and_then(|v| v.checked_sub(1)))
        .collect::<Option<_>>()?;
    match (kind, idx.as_slice()) {
        ("P", [unit, period]) => Some(ColumnKey::Power {
            unit: *unit,
            period: *period,
        }),
        ("PS", [unit, period, segment]) => Some(ColumnKey::Segment {
            unit: *unit,
            period: *period,
            segment: *segment,
        }),
        ("U", [unit, period, segment]) => Some(ColumnKey::Binary {
            unit: *unit,
            period: *period,
            segment: *segment,
        }),
        ("SR", [product, unit, period]) => Some(ColumnKey::Reserve {
            product: *product,
            unit: *unit,
            period: *period,
        }),
        _ => None,
    }
}

/// Writes the model in free-format MPS for external MILP solvers.
pub fn write_mps(milp: &MilpInstance) -> String {
    // MPS names may not contain spaces; the generated names never do.
    let names: Vec<String> = (0..milp.num_cols).map(|j| milp.column_name(j)).collect();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); milp.num_cols];
    for (i, row) in milp.rows.iter().enumerate() {
        for &(j, a) in &row.terms {
            by_col[j].push((i, a));
        }
    }
    let mut out = String::new();
    writeln!(out, "NAME {}", milp.name).unwrap();
    out.push_str("ROWS\n N obj\n");
    for row in &milp.rows {
        let s = match row.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        writeln!(out, " {s} {}", row.name).unwrap();
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for j in 0..milp.num_cols {
        if milp.is_binary[j] != in_int {
            let tag = if milp.is_binary[j] { "INTORG" } else { "INTEND" };
            writeln!(out, " M{marker} 'MARKER' '{tag}'").unwrap();
            marker += 1;
            in_int = milp.is_binary[j];
        }
        writeln!(out, " {} obj {}", names[j], fmt_num(milp.objective[j])).unwrap();
        for &(i, a) in &by_col[j] {
            writeln!(out, " {} {} {}", names[j], milp.rows[i].name, fmt_num(a)).unwrap();
        }
    }
    if in_int {
        writeln!(out, " M{marker} 'MARKER' 'INTEND'").unwrap();
    }
    out.push_str("RHS\n");
    for row in milp.rows.iter().filter(|r| r.rhs != 0.0) {
        writeln!(out, " rhs {} {}", row.name, fmt_num(row.rhs)).unwrap();
    }
    out.push_str("BOUNDS\n");
    for j in 0..milp.num_cols {
        let (lo, hi) = (milp.lower[j], milp.upper[j]);
        if milp.is_binary[j] && lo == 0.0 && hi == 1.0 {
            writeln!(out, " BV bnd {}", names[j]).unwrap();
            continue;
        }
        if lo == hi {
            writeln!(out, " FX bnd {} {}", names[j], fmt_num(lo)).unwrap();
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => writeln!(out, " FR bnd {}", names[j]).unwrap(),
            (false, true) => {
                writeln!(out, " MI bnd {}", names[j]).unwrap();
                writeln!(out, " UP bnd {} {}", names[j], fmt_num(hi)).unwrap();
            }
            (true, hi_finite) => {
                if lo != 0.0 {
                    writeln!(out, " LO bnd {} {}", names[j], fmt_num(lo)).unwrap();
                }
                if hi_finite {
                    writeln!(out, " UP bnd {} {}", names[j], fmt_num(hi)).unwrap();
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}
