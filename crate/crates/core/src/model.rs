//! Thermal unit cost model, dispatch instances, and schedule checking.
//!
//! Units are indexed `0..N` and periods `0..T` internally; reports and files
//! use 1-based numbering.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DedError, Result};

/// Default schedule validation tolerance in MW (two-decimal rounding).
pub const DEFAULT_VALIDATION_TOL: f64 = 0.01;

/// One thermal unit: cost coefficients, output limits, and ramp rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorUnit {
    pub id: usize,
    /// Constant cost term, $/h.
    pub alpha: f64,
    /// Linear cost term, $/MWh.
    pub beta: f64,
    /// Quadratic cost term, $/MW²h.
    pub gamma: f64,
    /// Valve-point ripple amplitude, $/h.
    pub e: f64,
    /// Valve-point ripple frequency, rad/MW.
    pub f: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Maximum hourly decrease (magnitude).
    pub ramp_down: f64,
    /// Maximum hourly increase.
    pub ramp_up: f64,
    pub initial_power: Option<f64>,
}

impl GeneratorUnit {
    /// Checks the unit invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| DedError::InvalidUnit {
            unit: self.id,
            reason,
        };
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("e", self.e),
            ("f", self.f),
            ("p_min", self.p_min),
            ("p_max", self.p_max),
            ("ramp_down", self.ramp_down),
            ("ramp_up", self.ramp_up),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(bad(format!("{name} is not finite")));
            }
            if v < 0.0 {
                return Err(bad(format!("{name} = {v} is negative")));
            }
        }
        if self.p_min >= self.p_max {
            return Err(bad(format!(
                "p_min = {} must be below p_max = {}",
                self.p_min, self.p_max
            )));
        }
        if let Some(p0) = self.initial_power {
            if !p0.is_finite() || p0 < self.p_min || p0 > self.p_max {
                return Err(bad(format!(
                    "initial_power = {p0} outside [{}, {}]",
                    self.p_min, self.p_max
                )));
            }
        }
        Ok(())
    }

    /// Convex quadratic part of the fuel cost.
    pub fn quadratic_cost(&self, p: f64) -> Result<f64> {
        check_finite(p)?;
        Ok(self.alpha + self.beta * p + self.gamma * p * p)
    }

    /// Rectified-sine valve-point ripple `|e sin(f (p - p_min))|`.
    pub fn vpe_cost(&self, p: f64) -> Result<f64> {
        check_finite(p)?;
        Ok((self.e * (self.f * (p - self.p_min)).sin()).abs())
    }

    /// Total fuel cost: quadratic part plus valve-point ripple.
    pub fn true_cost(&self, p: f64) -> Result<f64> {
        Ok(self.quadratic_cost(p)? + self.vpe_cost(p)?)
    }

    /// Outputs in `[p_min, p_max]` where the ripple vanishes.
    pub fn vpe_zeros(&self) -> Vec<f64> {
        if self.f <= 0.0 {
            return vec![self.p_min];
        }
        let step = PI / self.f;
        (0..)
            .map(|k| self.p_min + k as f64 * step)
            .take_while(|&p| p <= self.p_max)
            .collect()
    }
}

fn check_finite(p: f64) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(DedError::NonFinite(format!("power output {p}")))
    }
}

/// Free-function form of [`GeneratorUnit::quadratic_cost`].
pub fn quadratic_cost(unit: &GeneratorUnit, p: f64) -> Result<f64> {
    unit.quadratic_cost(p)
}

/// Free-function form of [`GeneratorUnit::vpe_cost`].
pub fn vpe_cost(unit: &GeneratorUnit, p: f64) -> Result<f64> {
    unit.vpe_cost(p)
}

/// Free-function form of [`GeneratorUnit::true_cost`].
pub fn true_cost(unit: &GeneratorUnit, p: f64) -> Result<f64> {
    unit.true_cost(p)
}

/// A spinning-reserve product: delivery time and per-period requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReserveProduct {
    /// Delivery duration in hours.
    pub tau: f64,
    /// Requirement per period, MW.
    pub requirement: Vec<f64>,
}

/// A dispatch problem: units, hourly demand, and reserve products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemInstance {
    pub units: Vec<GeneratorUnit>,
    pub demand: Vec<f64>,
    pub reserves: Vec<ReserveProduct>,
    pub horizon: usize,
}

impl SystemInstance {
    /// Builds an instance and checks every structural invariant.
    ///
    /// Demand outside `[Σ p_min, Σ p_max]` is accepted; use
    /// [`SystemInstance::static_infeasibility`] to detect it.
    pub fn new(
        units: Vec<GeneratorUnit>,
        demand: Vec<f64>,
        reserves: Vec<ReserveProduct>,
        horizon: usize,
    ) -> Result<Self> {
        let inst = SystemInstance {
            units,
            demand,
            reserves,
            horizon,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            return Err(DedError::InvalidInstance("no units".into()));
        }
        if self.horizon == 0 {
            return Err(DedError::InvalidInstance("horizon must be at least 1".into()));
        }
        for u in &self.units {
            u.validate()?;
        }
        if self.demand.len() != self.horizon {
            return Err(DedError::InvalidInstance(format!(
                "demand has {} entries but horizon is {}",
                self.demand.len(),
                self.horizon
            )));
        }
        for (t, &d) in self.demand.iter().enumerate() {
            if !d.is_finite() || d <= 0.0 {
                return Err(DedError::InvalidInstance(format!(
                    "demand in period {} must be positive, got {d}",
                    t + 1
                )));
            }
        }
        for (r, prod) in self.reserves.iter().enumerate() {
            if !prod.tau.is_finite() || prod.tau <= 0.0 {
                return Err(DedError::InvalidInstance(format!(
                    "reserve product {} has non-positive tau {}",
                    r + 1,
                    prod.tau
                )));
            }
            if prod.requirement.len() != self.horizon {
                return Err(DedError::InvalidInstance(format!(
                    "reserve product {} has {} requirement entries but horizon is {}",
                    r + 1,
                    prod.requirement.len(),
                    self.horizon
                )));
            }
            if let Some(v) = prod.requirement.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(DedError::InvalidInstance(format!(
                    "reserve product {} has invalid requirement {v}",
                    r + 1
                )));
            }
        }
        Ok(())
    }

    /// Periods (0-based) whose demand cannot be met within unit limits.
    pub fn static_infeasibility(&self) -> Vec<usize> {
        let lo: f64 = self.units.iter().map(|u| u.p_min).sum();
        let hi: f64 = self.units.iter().map(|u| u.p_max).sum();
        self.demand
            .iter()
            .enumerate()
            .filter(|(_, &d)| d < lo - 1e-9 || d > hi + 1e-9)
            .map(|(t, _)| t)
            .collect()
    }

    pub fn is_statically_feasible(&self) -> bool {
        self.static_infeasibility().is_empty()
    }
}

/// Unit outputs and reserve allocations, indexed `[unit][period]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub power: Vec<Vec<f64>>,
    /// One `[unit][period]` matrix per reserve product; empty when the
    /// schedule carries outputs only.
    pub reserve: Vec<Vec<Vec<f64>>>,
}

impl Schedule {
    pub fn new(power: Vec<Vec<f64>>) -> Self {
        Schedule {
            power,
            reserve: Vec::new(),
        }
    }

    fn check_dims(&self, inst: &SystemInstance) -> Result<()> {
        let n = inst.num_units();
        let t = inst.horizon;
        let matrix_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|row| row.len() == t);
        if !matrix_ok(&self.power) {
            return Err(DedError::Dimension(format!(
                "schedule power must be {n} units x {t} periods"
            )));
        }
        if !self.reserve.is_empty() {
            if self.reserve.len() != inst.reserves.len() {
                return Err(DedError::Dimension(format!(
                    "schedule has {} reserve matrices, instance has {} products",
                    self.reserve.len(),
                    inst.reserves.len()
                )));
            }
            if !self.reserve.iter().all(matrix_ok) {
                return Err(DedError::Dimension(format!(
                    "reserve matrices must be {n} units x {t} periods"
                )));
            }
        }
        let finite = self
            .power
            .iter()
            .chain(self.reserve.iter().flatten())
            .flatten()
            .all(|v| v.is_finite());
        if !finite {
            return Err(DedError::NonFinite("schedule entry".into()));
        }
        Ok(())
    }
}

/// Total true cost of a schedule over the horizon.
pub fn schedule_cost(inst: &SystemInstance, schedule: &Schedule) -> Result<f64> {
    schedule.check_dims(inst)?;
    let mut total = 0.0;
    for (unit, row) in inst.units.iter().zip(&schedule.power) {
        for &p in row {
            total += unit.true_cost(p)?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Balance,
    LowerLimit,
    UpperLimit,
    RampUp,
    RampDown,
    /// A unit's reserve exceeds `min(p_max - P, tau * ramp_up)`.
    ReserveUnitCap,
    ReserveNegative,
    /// Allocated reserve falls short of the requirement.
    ReserveRequirement,
    /// No reserve allocation given and available headroom falls short.
    ReserveCapacity,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstraintKind::Balance => "balance",
            ConstraintKind::LowerLimit => "lower-limit",
            ConstraintKind::UpperLimit => "upper-limit",
            ConstraintKind::RampUp => "ramp-up",
            ConstraintKind::RampDown => "ramp-down",
            ConstraintKind::ReserveUnitCap => "reserve-unit-cap",
            ConstraintKind::ReserveNegative => "reserve-negative",
            ConstraintKind::ReserveRequirement => "reserve-requirement",
            ConstraintKind::ReserveCapacity => "reserve-capacity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ConstraintKind,
    /// 0-based unit index, absent for system-wide rows.
    pub unit: Option<usize>,
    /// 0-based period.
    pub period: usize,
    /// Reserve product index for reserve checks.
    pub product: Option<usize>,
    /// Amount by which the constraint is exceeded, MW.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// Every check whose excess is above the tolerance.
    pub violations: Vec<Violation>,
    /// Largest excess over all checks, tolerated or not.
    pub worst_violation: f64,
    pub tolerance: f64,
    pub is_feasible: bool,
}

/// Checks balance, output limits, ramps, and reserve constraints.
///
/// A schedule without reserve matrices is checked against reserve capacity:
/// the best allocation `Σ_i min(p_max - P, tau * ramp_up)` must cover each
/// requirement.
pub fn validate_schedule(
    inst: &SystemInstance,
    schedule: &Schedule,
    tol: f64,
) -> Result<ViolationReport> {
    if !(tol >= 0.0) {
        return Err(DedError::InvalidArgument(format!("tolerance {tol} must be >= 0")));
    }
    schedule.check_dims(inst)?;
    let mut worst = 0.0f64;
    let mut violations = Vec::new();
    let mut record = |kind, unit, period, product, excess: f64| {
        worst = worst.max(excess);
        if excess > tol {
            violations.push(Violation {
                kind,
                unit,
                period,
                product,
                magnitude: excess,
            });
        }
    };

    for t in 0..inst.horizon {
        let total: f64 = schedule.power.iter().map(|row| row[t]).sum();
        record(ConstraintKind::Balance, None, t, None, (total - inst.demand[t]).abs());
    }
    for (i, (unit, row)) in inst.units.iter().zip(&schedule.power).enumerate() {
        for (t, &p) in row.iter().enumerate() {
            record(ConstraintKind::LowerLimit, Some(i), t, None, unit.p_min - p);
            record(ConstraintKind::UpperLimit, Some(i), t, None, p - unit.p_max);
            let prev = if t == 0 { unit.initial_power } else { Some(row[t - 1]) };
            if let Some(prev) = prev {
                let delta = p - prev;
                record(ConstraintKind::RampUp, Some(i), t, None, delta - unit.ramp_up);
                record(ConstraintKind::RampDown, Some(i), t, None, -unit.ramp_down - delta);
            }
        }
    }
    for (r, prod) in inst.reserves.iter().enumerate() {
        for t in 0..inst.horizon {
            if let Some(sr) = schedule.reserve.get(r) {
                let mut total = 0.0;
                for (i, unit) in inst.units.iter().enumerate() {
                    let v = sr[i][t];
                    let cap = (unit.p_max - schedule.power[i][t]).min(prod.tau * unit.ramp_up);
                    record(ConstraintKind::ReserveUnitCap, Some(i), t, Some(r), v - cap);
                    record(ConstraintKind::ReserveNegative, Some(i), t, Some(r), -v);
                    total += v;
                }
                record(
                    ConstraintKind::ReserveRequirement,
                    None,
                    t,
                    Some(r),
                    prod.requirement[t] - total,
                );
            } else {
                let capacity: f64 = inst
                    .units
                    .iter()
                    .enumerate()
                    .map(|(i, u)| {
                        (u.p_max - schedule.power[i][t])
                            .min(prod.tau * u.ramp_up)
                            .max(0.0)
                    })
                    .sum();
                record(
                    ConstraintKind::ReserveCapacity,
                    None,
                    t,
                    Some(r),
                    prod.requirement[t] - capacity,
                );
            }
        }
    }
    Ok(ViolationReport {
        is_feasible: worst <= tol,
        worst_violation: worst,
        tolerance: tol,
        violations,
    })
}

/// Relative optimality gap `(z - lb) / lb` of a schedule cost against a lower bound.
pub fn optimality_gap(z: f64, lb: f64) -> Result<f64> {
    if !z.is_finite() || !lb.is_finite() {
        return Err(DedError::NonFinite(format!("gap inputs z={z}, lb={lb}")));
    }
    if lb <= 0.0 {
        return Err(DedError::InvalidArgument(format!(
            "optimality gap undefined for lower bound {lb} <= 0"
        )));
    }
    Ok((z - lb) / lb)
}

#[cfg(test)]
pub(crate) fn toy_unit() -> GeneratorUnit {
    GeneratorUnit {
        id: 1,
        alpha: 100.0,
        beta: 10.0,
        gamma: 0.05,
        e: 20.0,
        f: PI / 20.0,
        p_min: 20.0,
        p_max: 60.0,
        ramp_down: 15.0,
        ramp_up: 15.0,
        initial_power: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn one_unit(demand: Vec<f64>) -> SystemInstance {
        let t = demand.len();
        SystemInstance::new(vec![toy_unit()], demand, vec![], t).unwrap()
    }

    #[test]
    fn quadratic_cost_hand_values() {
        let u = toy_unit();
        assert_relative_eq!(u.quadratic_cost(20.0).unwrap(), 320.0);
        assert_relative_eq!(u.quadratic_cost(40.0).unwrap(), 580.0);
        let zero = GeneratorUnit {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            ..toy_unit()
        };
        assert_eq!(zero.quadratic_cost(37.0).unwrap(), 0.0);
        assert!(u.quadratic_cost(f64::NAN).is_err());
        assert!(u.vpe_cost(f64::INFINITY).is_err());
    }

    #[test]
    fn vpe_cost_hand_values() {
        let u = toy_unit();
        assert_eq!(u.vpe_cost(20.0).unwrap(), 0.0);
        assert_relative_eq!(u.vpe_cost(30.0).unwrap(), 20.0, max_relative = 1e-12);
        assert!(u.vpe_cost(40.0).unwrap() < 1e-12);
    }

    #[test]
    fn true_cost_hand_values() {
        let u = toy_unit();
        assert_relative_eq!(u.true_cost(30.0).unwrap(), 465.0, max_relative = 1e-12);
        assert_relative_eq!(u.true_cost(20.0).unwrap(), 320.0);
        let expected = 381.25 + 20.0 * (PI / 4.0).sin();
        assert_relative_eq!(u.true_cost(25.0).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(u.true_cost(25.0).unwrap(), 395.3921, epsilon = 1e-4);
    }

    #[test]
    fn schedule_cost_sums_periods() {
        let inst = one_unit(vec![20.0, 30.0]);
        let s = Schedule::new(vec![vec![20.0, 30.0]]);
        assert_relative_eq!(schedule_cost(&inst, &s).unwrap(), 785.0, max_relative = 1e-12);

        let free = GeneratorUnit {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            e: 0.0,
            ..toy_unit()
        };
        let inst0 = SystemInstance::new(vec![free], vec![30.0, 40.0], vec![], 2).unwrap();
        let s0 = Schedule::new(vec![vec![33.0, 41.0]]);
        assert_eq!(schedule_cost(&inst0, &s0).unwrap(), 0.0);

        let bad = Schedule::new(vec![vec![20.0]]);
        assert!(matches!(schedule_cost(&inst, &bad), Err(DedError::Dimension(_))));
    }

    #[test]
    fn validate_flags_limit_excess() {
        let inst = one_unit(vec![65.0]);
        let s = Schedule::new(vec![vec![65.0]]);
        let rep = validate_schedule(&inst, &s, 0.01).unwrap();
        assert!(!rep.is_feasible);
        let v = rep
            .violations
            .iter()
            .find(|v| v.kind == ConstraintKind::UpperLimit)
            .unwrap();
        assert_relative_eq!(v.magnitude, 5.0);
        assert_relative_eq!(rep.worst_violation, 5.0);
    }

    #[test]
    fn validate_flags_ramp_excess() {
        let inst = one_unit(vec![25.0, 43.0]);
        let s = Schedule::new(vec![vec![25.0, 43.0]]);
        let rep = validate_schedule(&inst, &s, 0.01).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].kind, ConstraintKind::RampUp);
        assert_eq!(rep.violations[0].period, 1);
        assert_relative_eq!(rep.violations[0].magnitude, 3.0, max_relative = 1e-12);

        let down = one_unit(vec![43.0, 25.0]);
        let s = Schedule::new(vec![vec![43.0, 25.0]]);
        let rep = validate_schedule(&down, &s, 0.01).unwrap();
        assert_eq!(rep.violations[0].kind, ConstraintKind::RampDown);
    }

    #[test]
    fn first_period_ramp_only_with_initial_power() {
        let s = Schedule::new(vec![vec![50.0]]);
        let inst = one_unit(vec![50.0]);
        assert!(validate_schedule(&inst, &s, 0.01).unwrap().is_feasible);
        let mut unit = toy_unit();
        unit.initial_power = Some(30.0);
        let inst = SystemInstance::new(vec![unit], vec![50.0], vec![], 1).unwrap();
        let rep = validate_schedule(&inst, &s, 0.01).unwrap();
        assert_eq!(rep.violations[0].kind, ConstraintKind::RampUp);
        assert_relative_eq!(rep.violations[0].magnitude, 5.0);
    }

    #[test]
    fn reserve_checks() {
        let reserves = vec![ReserveProduct {
            tau: 1.0,
            requirement: vec![10.0],
        }];
        let inst = SystemInstance::new(vec![toy_unit()], vec![45.0], reserves, 1).unwrap();
        // headroom 15, ramp cap 15
        let mut s = Schedule::new(vec![vec![45.0]]);
        assert!(validate_schedule(&inst, &s, 0.01).unwrap().is_feasible);
        s.reserve = vec![vec![vec![12.0]]];
        assert!(validate_schedule(&inst, &s, 0.01).unwrap().is_feasible);
        s.reserve = vec![vec![vec![8.0]]];
        let rep = validate_schedule(&inst, &s, 0.01).unwrap();
        assert_eq!(rep.violations[0].kind, ConstraintKind::ReserveRequirement);
        assert_relative_eq!(rep.violations[0].magnitude, 2.0);
        s.reserve = vec![vec![vec![16.0]]];
        let rep = validate_schedule(&inst, &s, 0.01).unwrap();
        assert_eq!(rep.violations[0].kind, ConstraintKind::ReserveUnitCap);

        let s = Schedule::new(vec![vec![55.0]]);
        let inst2 = SystemInstance::new(
            vec![toy_unit()],
            vec![55.0],
            vec![ReserveProduct {
                tau: 1.0,
                requirement: vec![10.0],
            }],
            1,
        )
        .unwrap();
        let rep = validate_schedule(&inst2, &s, 0.01).unwrap();
        assert_eq!(rep.violations[0].kind, ConstraintKind::ReserveCapacity);
        assert_relative_eq!(rep.violations[0].magnitude, 5.0);
    }

    #[test]
    fn gap_values() {
        assert_eq!(optimality_gap(100.0, 100.0).unwrap(), 0.0);
        assert_relative_eq!(optimality_gap(101.0, 100.0).unwrap(), 0.01);
        let g = optimality_gap(1016533.0, 1012483.0).unwrap();
        assert!((g - 0.0040).abs() < 5e-5);
        assert!(optimality_gap(1.0, 0.0).is_err());
        assert!(optimality_gap(1.0, -5.0).is_err());
    }

    #[test]
    fn instance_invariants() {
        let mut u = toy_unit();
        u.p_min = 70.0;
        assert!(matches!(u.validate(), Err(DedError::InvalidUnit { .. })));
        assert!(SystemInstance::new(vec![toy_unit()], vec![30.0], vec![], 2).is_err());
        assert!(SystemInstance::new(vec![toy_unit()], vec![-1.0], vec![], 1).is_err());
        let inst = SystemInstance::new(vec![toy_unit()], vec![30.0, 70.0], vec![], 2).unwrap();
        assert_eq!(inst.static_infeasibility(), vec![1]);
    }

    #[test]
    fn vpe_zero_positions() {
        let u = toy_unit();
        assert_eq!(u.vpe_zeros().len(), 3);
        for z in u.vpe_zeros() {
            assert!(u.vpe_cost(z).unwrap() <= 1e-9 * u.true_cost(z).unwrap());
        }
    }

    fn arb_unit() -> impl Strategy<Value = GeneratorUnit> {
        (
            0.0..1000.0f64,
            0.0..30.0f64,
            0.0..0.2f64,
            0.0..500.0f64,
            0.0..0.2f64,
            0.0..200.0f64,
            1.0..300.0f64,
        )
            .prop_map(|(alpha, beta, gamma, e, f, p_min, span)| GeneratorUnit {
                id: 1,
                alpha,
                beta,
                gamma,
                e,
                f,
                p_min,
                p_max: p_min + span,
                ramp_down: span,
                ramp_up: span,
                initial_power: None,
            })
    }

    proptest! {
        #[test]
        fn vpe_nonnegative_and_true_cost_dominates(u in arb_unit(), s in 0.0..1.0f64) {
            let p = u.p_min + s * (u.p_max - u.p_min);
            prop_assert!(u.vpe_cost(p).unwrap() >= 0.0);
            prop_assert!(u.true_cost(p).unwrap() >= u.quadratic_cost(p).unwrap());
        }

        #[test]
        fn quadratic_cost_is_convex(u in arb_unit(), s1 in 0.0..1.0f64, s2 in 0.0..1.0f64, lam in 0.0..1.0f64) {
            let span = u.p_max - u.p_min;
            let (p1, p2) = (u.p_min + s1 * span, u.p_min + s2 * span);
            let mid = u.quadratic_cost(lam * p1 + (1.0 - lam) * p2).unwrap();
            let chord = lam * u.quadratic_cost(p1).unwrap() + (1.0 - lam) * u.quadratic_cost(p2).unwrap();
            prop_assert!(mid <= chord + 1e-9 * chord.abs().max(1.0));
        }

        #[test]
        fn vpe_vanishes_at_zeros(u in arb_unit()) {
            for z in u.vpe_zeros() {
                let scale = u.true_cost(z).unwrap().abs().max(1.0);
                prop_assert!(u.vpe_cost(z).unwrap() <= 1e-9 * scale);
            }
        }

        #[test]
        fn gap_nonnegative_when_z_above_lb(lb in 1.0..1e7f64, extra in 0.0..1e5f64) {
            prop_assert!(optimality_gap(lb + extra, lb).unwrap() >= 0.0);
        }

        #[test]
        fn validation_is_order_independent(
            outputs in proptest::collection::vec(proptest::collection::vec(20.0..60.0f64, 3), 2),
            tol in 0.0..1.0f64,
        ) {
            let units = vec![toy_unit(), GeneratorUnit { id: 2, ..toy_unit() }];
            let demand: Vec<f64> = (0..3).map(|t| outputs[0][t] + outputs[1][t]).collect();
            let inst = SystemInstance::new(units, demand, vec![], 3).unwrap();
            let s = Schedule::new(outputs.clone());
            let a = validate_schedule(&inst, &s, tol).unwrap();
            let b = validate_schedule(&inst, &s, tol).unwrap();
            prop_assert_eq!(&a, &b);
            let swapped = Schedule::new(vec![outputs[1].clone(), outputs[0].clone()]);
            let c = validate_schedule(&inst, &swapped, tol).unwrap();
            prop_assert_eq!(a.is_feasible, c.is_feasible);
            prop_assert!((a.worst_violation - c.worst_violation).abs() < 1e-9);
        }
    }
}
