//! Equal-segment piecewise-linear approximation of the total unit cost.
//!
//! Breakpoints sit at `p_min + l * pi / (m f)`, so every `m` segments span
//! one half period of the ripple and each segment sees a single concave arc
//! of `|sin|`. The last segment is truncated at `p_max`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DedError, Result};
use crate::model::GeneratorUnit;

/// Chord slopes and intercepts of one unit's linearized cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCost {
    pub unit_id: usize,
    pub num_segments: usize,
    /// `num_segments + 1` strictly increasing outputs from `p_min` to `p_max`.
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
    pub intercepts: Vec<f64>,
    /// Segments per half period of the ripple.
    pub m_param: usize,
}

/// Number of segments for a unit: `ceil(m f (p_max - p_min) / pi)`, at least 1.
pub fn segment_count(unit: &GeneratorUnit, m: usize) -> usize {
    if unit.f <= 0.0 {
        return 1;
    }
    let x = m as f64 * unit.f * (unit.p_max - unit.p_min) / PI;
    // Absorb round-off so an exact multiple does not spawn a sliver segment.
    let l = (x - 1e-9 * x.max(1.0)).ceil();
    (l as usize).max(1)
}

pub fn breakpoints(unit: &GeneratorUnit, m: usize) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(DedError::InvalidArgument("segment parameter m must be >= 1".into()));
    }
    if !(unit.p_min < unit.p_max) {
        return Err(DedError::InvalidUnit {
            unit: unit.id,
            reason: format!("p_min = {} must be below p_max = {}", unit.p_min, unit.p_max),
        });
    }
    if unit.f <= 0.0 {
        return Ok(vec![unit.p_min, unit.p_max]);
    }
    let count = segment_count(unit, m);
    let step = PI / (m as f64 * unit.f);
    let mut pts: Vec<f64> = (0..count)
        .map(|l| unit.p_min + l as f64 * step)
        .collect();
    pts.push(unit.p_max);
    Ok(pts)
}

pub fn build_piecewise(unit: &GeneratorUnit, m: usize) -> Result<PiecewiseCost> {
    let pts = breakpoints(unit, m)?;
    let costs = pts
        .iter()
        .map(|&p| unit.true_cost(p))
        .collect::<Result<Vec<_>>>()?;
    let mut slopes = Vec::with_capacity(pts.len() - 1);
    let mut intercepts = Vec::with_capacity(pts.len() - 1);
    for l in 1..pts.len() {
        let k = (costs[l] - costs[l - 1]) / (pts[l] - pts[l - 1]);
        slopes.push(k);
        intercepts.push(costs[l - 1] - k * pts[l - 1]);
    }
    Ok(PiecewiseCost {
        unit_id: unit.id,
        num_segments: slopes.len(),
        breakpoints: pts,
        slopes,
        intercepts,
        m_param: m,
    })
}

impl PiecewiseCost {
    /// 0-based index of a segment containing `p`.
    pub fn segment_of(&self, p: f64) -> Result<usize> {
        let lo = self.breakpoints[0];
        let hi = *self.breakpoints.last().expect("breakpoints are never empty");
        if !p.is_finite() || p < lo || p > hi {
            return Err(DedError::OutOfRange { value: p, lo, hi });
        }
        // First breakpoint strictly above p, among a_1..a_L.
        let idx = self.breakpoints[1..].partition_point(|&a| a < p);
        Ok(idx.min(self.num_segments - 1))
    }

    /// Approximate cost `k_s p + b_s` on the segment containing `p`.
    pub fn approx_cost(&self, p: f64) -> Result<f64> {
        let s = self.segment_of(p)?;
        Ok(self.slopes[s] * p + self.intercepts[s])
    }
}

pub fn approx_cost(pwc: &PiecewiseCost, p: f64) -> Result<f64> {
    pwc.approx_cost(p)
}

/// Linear interpolation of `f` between consecutive points of `grid`.
pub fn chord_interpolate<F>(grid: &[f64], f: F, p: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if !p.is_finite() || p < lo || p > hi {
        return Err(DedError::OutOfRange { value: p, lo, hi });
    }
    let idx = grid[1..].partition_point(|&a| a < p).min(grid.len() - 2);
    let (a0, a1) = (grid[idx], grid[idx + 1]);
    let (f0, f1) = (f(a0)?, f(a1)?);
    Ok(f0 + (f1 - f0) * (p - a0) / (a1 - a0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxErrorReport {
    /// Largest amount by which the true cost exceeds the approximation.
    pub max_under: f64,
    /// Largest amount by which the approximation exceeds the true cost.
    pub max_over: f64,
    pub is_lower_approx: bool,
    pub samples: usize,
}

/// Default sample count for [`approx_error_report`]: `10 L + 1`.
pub fn default_samples(pwc: &PiecewiseCost) -> usize {
    10 * pwc.num_segments + 1
}

/// Samples the approximation error on a uniform grid over `[p_min, p_max]`.
pub fn approx_error_report(
    unit: &GeneratorUnit,
    pwc: &PiecewiseCost,
    n_samples: usize,
) -> Result<ApproxErrorReport> {
    if n_samples < 2 {
        return Err(DedError::InvalidArgument("need at least 2 samples".into()));
    }
    let span = unit.p_max - unit.p_min;
    let grid = (0..n_samples).map(|s| {
        if s + 1 == n_samples {
            unit.p_max
        } else {
            unit.p_min + span * s as f64 / (n_samples - 1) as f64
        }
    });
    error_report_on(unit, pwc, grid)
}

/// Same as [`approx_error_report`] on caller-supplied sample points.
pub fn error_report_on<I>(unit: &GeneratorUnit, pwc: &PiecewiseCost, points: I) -> Result<ApproxErrorReport>
where
    I: IntoIterator<Item = f64>,
{
    let mut max_under = 0.0f64;
    let mut max_over = 0.0f64;
    let mut lower = true;
    let mut samples = 0;
    for p in points {
        let c = unit.true_cost(p)?;
        let approx = pwc.approx_cost(p)?;
        max_under = max_under.max(c - approx);
        max_over = max_over.max(approx - c);
        if approx - c > 1e-6 * c.abs().max(1.0) {
            lower = false;
        }
        samples += 1;
    }
    Ok(ApproxErrorReport {
        max_under,
        max_over,
        is_lower_approx: lower,
        samples,
    })
}
