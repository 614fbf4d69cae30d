//! TOML instance files.
//!
//! ```toml
//! horizon = 2
//! demand = [150.0, 180.0]
//!
//! [metadata]
//! name = "two-period"
//! source = "hand-made"
//!
//! [[units]]
//! alpha = 100.0
//! beta = 10.0
//! gamma = 0.05
//! e = 20.0
//! f = 0.157
//! p_min = 20.0
//! p_max = 200.0
//! ramp_down = 50.0
//! ramp_up = 50.0
//! # initial_power = 120.0
//!
//! [[reserves]]
//! tau_hours = 1.0
//! fraction_of_demand = 0.05   # or: requirement = [7.5, 9.0]
//! ```
//!
//! Units are numbered by their order in the file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DedError, Result};
use crate::model::{GeneratorUnit, ReserveProduct, SystemInstance};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default)]
    pub name: String,
    /// Where the data comes from.
    #[serde(default)]
    pub source: String,
}

/// A parsed instance file: the validated instance and its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub metadata: Metadata,
    pub instance: SystemInstance,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    horizon: usize,
    demand: Vec<f64>,
    #[serde(default)]
    metadata: Metadata,
    units: Vec<RawUnit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    reserves: Vec<RawReserve>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnit {
    alpha: f64,
    beta: f64,
    gamma: f64,
    e: f64,
    f: f64,
    p_min: f64,
    p_max: f64,
    ramp_down: f64,
    ramp_up: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_power: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReserve {
    tau_hours: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    requirement: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fraction_of_demand: Option<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses instance text; reserve fractions are expanded against demand.
pub fn parse_instance_str(text: &str) -> Result<InstanceFile> {
    let raw: RawFile = toml::from_str(text).map_err(|e| DedError::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let units = raw
        .units
        .into_iter()
        .enumerate()
        .map(|(id, u)| GeneratorUnit {
            id,
            alpha: u.alpha,
            beta: u.beta,
            gamma: u.gamma,
            e: u.e,
            f: u.f,
            p_min: u.p_min,
            p_max: u.p_max,
            ramp_down: u.ramp_down,
            ramp_up: u.ramp_up,
            initial_power: u.initial_power,
        })
        .collect();
    let mut reserves = Vec::with_capacity(raw.reserves.len());
    for (r, res) in raw.reserves.into_iter().enumerate() {
        let requirement = match (res.requirement, res.fraction_of_demand) {
            (Some(req), None) => req,
            (None, Some(frac)) => {
                if !(frac.is_finite() && frac >= 0.0) {
                    return Err(DedError::InvalidInstance(format!(
                        "reserve product {} has invalid fraction_of_demand {frac}",
                        r + 1
                    )));
                }
                raw.demand.iter().map(|d| frac * d).collect()
            }
            _ => {
                return Err(DedError::InvalidInstance(format!(
                    "reserve product {} needs exactly one of requirement or fraction_of_demand",
                    r + 1
                )))
            }
        };
        reserves.push(ReserveProduct {
            tau: res.tau_hours,
            requirement,
        });
    }
    let instance = SystemInstance::new(units, raw.demand, reserves, raw.horizon)?;
    Ok(InstanceFile {
        metadata: raw.metadata,
        instance,
    })
}

pub fn read_instance_file(path: impl AsRef<Path>) -> Result<InstanceFile> {
    parse_instance_str(&std::fs::read_to_string(path)?)
}

/// Reads and validates an instance file.
pub fn parse_instance(path: impl AsRef<Path>) -> Result<SystemInstance> {
    Ok(read_instance_file(path)?.instance)
}

/// Serializes an instance; reserves are written as explicit requirements.
pub fn render_instance(instance: &SystemInstance, metadata: &Metadata) -> Result<String> {
    let raw = RawFile {
        horizon: instance.horizon,
        demand: instance.demand.clone(),
        metadata: metadata.clone(),
        units: instance
            .units
            .iter()
            .map(|u| RawUnit {
                alpha: u.alpha,
                beta: u.beta,
                gamma: u.gamma,
                e: u.e,
                f: u.f,
                p_min: u.p_min,
                p_max: u.p_max,
                ramp_down: u.ramp_down,
                ramp_up: u.ramp_up,
                initial_power: u.initial_power,
            })
            .collect(),
        reserves: instance
            .reserves
            .iter()
            .map(|r| RawReserve {
                tau_hours: r.tau,
                requirement: Some(r.requirement.clone()),
                fraction_of_demand: None,
            })
            .collect(),
    };
    toml::to_string(&raw).map_err(|e| DedError::InvalidArgument(format!("cannot serialize instance: {e}")))
}

pub fn write_instance(instance: &SystemInstance, metadata: &Metadata, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_instance(instance, metadata)?)?;
    Ok(())
}

/// Replicates every unit `k` times and scales demand and reserve
/// requirements by `k`. Copy `c` of unit `i` gets id `c * N + i`.
pub fn duplicate_system(instance: &SystemInstance, k: usize) -> Result<SystemInstance> {
    if k == 0 {
        return Err(DedError::InvalidArgument("duplication factor must be at least 1".into()));
    }
    let n = instance.num_units();
    let kf = k as f64;
    let units = (0..k)
        .flat_map(|c| {
            instance.units.iter().enumerate().map(move |(i, u)| GeneratorUnit {
                id: c * n + i,
                ..u.clone()
            })
        })
        .collect();
    let reserves = instance
        .reserves
        .iter()
        .map(|r| ReserveProduct {
            tau: r.tau,
            requirement: r.requirement.iter().map(|v| v * kf).collect(),
        })
        .collect();
    SystemInstance::new(
        units,
        instance.demand.iter().map(|d| d * kf).collect(),
        reserves,
        instance.horizon,
    )
}
