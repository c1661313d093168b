//! The built-in example scenarios.

use stickslip::{Gains, State};

use crate::config::ScenarioConfig;

pub const PRESET_NAMES: &[&str] = &[
    "example1",
    "example2a",
    "example2b",
    "example2c",
    "example3",
    "example4a",
    "example4b",
    "example4c",
    "example4d",
    "example5",
];

/// Scenario bound to a preset name, or `None` for an unknown name.
///
/// `example1` uses fc = 1; the frictionless companion run is
/// `--sweep fc=0,1`.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let g = |kd, kp, ki| Gains { kd, kp, ki };
    let (gains, fc, x0, t_max, rate) = match name {
        "example1" => (
            g(0.0, 100.0, 1.0),
            1.0,
            State::new(0.0, 0.0, 10.0),
            60.0,
            200.0,
        ),
        "example2a" => (
            g(20.0, 100.0, 1000.0),
            50.0,
            State::new(0.0, -1.1, 0.0),
            120.0,
            100.0,
        ),
        "example2b" => (
            g(20.0, 100.0, 1000.0),
            75.0,
            State::new(0.0, -1.1, 0.0),
            120.0,
            100.0,
        ),
        "example2c" => (
            g(20.0, 100.0, 1000.0),
            100.0,
            State::new(0.0, -1.1, 0.0),
            120.0,
            100.0,
        ),
        "example3" => (
            g(10.0, 1040.0, 8000.0),
            100.0,
            State::new(0.0, -0.15, 0.0),
            10.0,
            1000.0,
        ),
        "example4a" => (
            g(56.0, 1040.0, 6400.0),
            100.0,
            State::new(0.0, -0.2, 0.0),
            20.0,
            200.0,
        ),
        "example4b" => (
            g(56.0, 1040.0, 6400.0),
            100.0,
            State::new(0.0, -0.25, 0.0),
            20.0,
            200.0,
        ),
        "example4c" => (
            g(56.0, 1040.0, 6400.0),
            100.0,
            State::new(0.0, -0.3, 0.0),
            20.0,
            200.0,
        ),
        "example4d" => (
            g(56.0, 1040.0, 6400.0),
            100.0,
            State::new(0.0, -0.35, 0.0),
            20.0,
            200.0,
        ),
        "example5" => (
            g(20.0, 100.0, 1000.0),
            50.0,
            State::new(0.0, -0.5, 0.0),
            1e5,
            1.0,
        ),
        _ => return None,
    };
    let mut cfg = ScenarioConfig::new(name, gains, fc, x0);
    cfg.t_max = t_max;
    cfg.output_rate = rate;
    Some(cfg)
}
