use thiserror::Error;

/// Errors raised by the simulator and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("state ({x1}, {x2}, {x3}) is not in stiction")]
    NotInStiction { x1: f64, x2: f64, x3: f64 },
    #[error("equivalent control is undefined without friction (fc = 0)")]
    Frictionless,
    #[error("relay input {u} is inconsistent with the velocity sign of x3 = {x3}")]
    InconsistentRelay { u: f64, x3: f64 },
    #[error("relay chatter: {flips} relay flips within {span:e} s at t = {time}")]
    ChatterDetected { time: f64, flips: usize, span: f64 },
    #[error("divergence: state norm {norm:e} exceeded bound at t = {time}")]
    DivergenceDetected { time: f64, norm: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
