//! Shared helpers for the integration tests.

#![allow(dead_code)]

pub mod exact_lp;

use ded_core::model::GeneratorUnit;

pub fn toy_unit() -> GeneratorUnit {
    GeneratorUnit {
        id: 0,
        alpha: 100.0,
        beta: 10.0,
        gamma: 0.05,
        e: 20.0,
        f: std::f64::consts::PI / 20.0,
        p_min: 20.0,
        p_max: 60.0,
        ramp_down: 15.0,
        ramp_up: 15.0,
        initial_power: None,
    }
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}
