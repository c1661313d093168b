//! Scenario description and its `key = value` file format.
//!
//! ```text
//! # example 2 with fc = 75
//! gains = 20, 100, 1000   # kd, kp, ki
//! fc = 75
//! x0 = 0, -1.1, 0
//! t_max = 120
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use stickslip::{FrictionParams, Gains, Limits, State};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Engine,
    Oracle,
    Both,
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "engine" => Ok(Mode::Engine),
            "oracle" => Ok(Mode::Oracle),
            "both" => Ok(Mode::Both),
            other => Err(CliError::config(format!(
                "unknown mode `{other}` (expected engine, oracle or both)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Engine => "engine",
            Mode::Oracle => "oracle",
            Mode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub gains: Gains,
    pub fc: f64,
    pub x0: State,
    pub t_max: f64,
    pub max_cycles: Option<usize>,
    pub eps_lambda: Option<f64>,
    /// Output samples per second of simulated time.
    pub output_rate: f64,
    pub out: PathBuf,
    pub mode: Mode,
    /// Oracle step (s).
    pub oracle_dt: f64,
    /// Sup-norm tolerance for engine/oracle agreement.
    pub tolerance: f64,
}

/// Keys that a sweep may vary.
pub const SWEEP_KEYS: &[&str] = &[
    "kd",
    "kp",
    "ki",
    "fc",
    "x1",
    "x2",
    "x3",
    "t_max",
    "eps_lambda",
    "output_rate",
    "oracle_dt",
    "tolerance",
];

impl ScenarioConfig {
    pub fn new(name: &str, gains: Gains, fc: f64, x0: State) -> Self {
        Self {
            name: name.to_string(),
            gains,
            fc,
            x0,
            t_max: 120.0,
            max_cycles: None,
            eps_lambda: None,
            output_rate: 100.0,
            out: PathBuf::from("out"),
            mode: Mode::Engine,
            oracle_dt: 1e-5,
            tolerance: 1e-6,
        }
    }

    /// Parses the `key = value` format. `gains` (or `kd`, `kp`, `ki`), `fc`
    /// and `x0` (or `x1`, `x2`, `x3`) are required.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::new(
            "config",
            Gains {
                kd: f64::NAN,
                kp: f64::NAN,
                ki: f64::NAN,
            },
            f64::NAN,
            State::new(f64::NAN, f64::NAN, f64::NAN),
        );
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::Parse { line: idx + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(at(format!("duplicate key `{key}`")));
            }
            cfg.set(key, value.trim()).map_err(|e| at(e.to_string()))?;
            seen.push(key.to_string());
        }
        let has = |k: &str| seen.iter().any(|s| s == k);
        let missing: Vec<&str> = [("gains", ["kd", "kp", "ki"]), ("x0", ["x1", "x2", "x3"])]
            .iter()
            .filter(|(vec, parts)| !has(vec) && !parts.iter().all(|p| has(p)))
            .map(|(vec, _)| *vec)
            .chain((!has("fc")).then_some("fc"))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::config(format!(
                "missing required key(s): {}",
                missing.join(", ")
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assigns one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "name" => self.name = value.to_string(),
            "gains" => {
                let [kd, kp, ki] = vector(key, value)?;
                self.gains = Gains { kd, kp, ki };
            }
            "kd" => self.gains.kd = scalar(key, value)?,
            "kp" => self.gains.kp = scalar(key, value)?,
            "ki" => self.gains.ki = scalar(key, value)?,
            "fc" => self.fc = scalar(key, value)?,
            "x0" => {
                let [x1, x2, x3] = vector(key, value)?;
                self.x0 = State::new(x1, x2, x3);
            }
            "x1" => self.x0.x1 = scalar(key, value)?,
            "x2" => self.x0.x2 = scalar(key, value)?,
            "x3" => self.x0.x3 = scalar(key, value)?,
            "t_max" => self.t_max = scalar(key, value)?,
            "max_cycles" => {
                self.max_cycles = Some(value.parse().map_err(|_| {
                    CliError::config(format!("max_cycles: `{value}` is not a count"))
                })?)
            }
            "eps_lambda" => self.eps_lambda = Some(scalar(key, value)?),
            "output_rate" => self.output_rate = scalar(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "mode" => self.mode = value.parse()?,
            "oracle_dt" => self.oracle_dt = scalar(key, value)?,
            "tolerance" => self.tolerance = scalar(key, value)?,
            other => return Err(CliError::config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.gains.validate()?;
        FrictionParams::new(self.fc)?;
        if !self.x0.is_finite() {
            return Err(CliError::config("x0 must be finite"));
        }
        for (name, v) in [
            ("t_max", self.t_max),
            ("output_rate", self.output_rate),
            ("oracle_dt", self.oracle_dt),
            ("tolerance", self.tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(eps) = self.eps_lambda {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(CliError::config(format!(
                    "eps_lambda must be positive, got {eps}"
                )));
            }
        }
        if self.max_cycles == Some(0) {
            return Err(CliError::config("max_cycles must be positive"));
        }
        Ok(())
    }

    pub fn friction(&self) -> FrictionParams {
        FrictionParams { fc: self.fc }
    }

    pub fn limits(&self) -> Limits {
        Limits {
            t_max: self.t_max,
            max_cycles: self.max_cycles.unwrap_or(usize::MAX),
            eps_lambda: self.eps_lambda,
            ..Limits::default()
        }
    }

    /// Serialises back into the file format.
    pub fn to_text(&self) -> String {
        let g = &self.gains;
        let mut s = format!(
            "name = {}\ngains = {:?}, {:?}, {:?}\nfc = {:?}\nx0 = {:?}, {:?}, {:?}\nt_max = {:?}\n",
            self.name, g.kd, g.kp, g.ki, self.fc, self.x0.x1, self.x0.x2, self.x0.x3, self.t_max
        );
        if let Some(n) = self.max_cycles {
            s += &format!("max_cycles = {n}\n");
        }
        if let Some(eps) = self.eps_lambda {
            s += &format!("eps_lambda = {eps:?}\n");
        }
        s += &format!(
            "output_rate = {:?}\nout = {}\nmode = {}\noracle_dt = {:?}\ntolerance = {:?}\n",
            self.output_rate,
            self.out.display(),
            self.mode,
            self.oracle_dt,
            self.tolerance
        );
        s
    }
}

fn scalar(key: &str, value: &str) -> CliResult<f64> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("{key}: `{}` is not a number", value.trim())))?;
    if !v.is_finite() {
        return Err(CliError::config(format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn vector(key: &str, value: &str) -> CliResult<[f64; 3]> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!(
            "{key}: expected 3 comma-separated values, got {}",
            parts.len()
        )));
    }
    Ok([
        scalar(key, parts[0])?,
        scalar(key, parts[1])?,
        scalar(key, parts[2])?,
    ])
}

/// Parses `PARAM=a,b,c` into the key and its values.
pub fn parse_sweep(spec: &str) -> CliResult<(String, Vec<String>)> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("sweep `{spec}`: expected PARAM=a,b,c")))?;
    let key = key.trim();
    if !SWEEP_KEYS.contains(&key) {
        return Err(CliError::config(format!(
            "sweep parameter `{key}` not supported (one of {})",
            SWEEP_KEYS.join(", ")
        )));
    }
    let values: Vec<String> = values
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(CliError::config(format!("sweep `{spec}` has no values")));
    }
    for v in &values {
        scalar(key, v)?;
    }
    Ok((key.to_string(), values))
}
