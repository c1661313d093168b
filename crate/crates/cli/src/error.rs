use std::path::PathBuf;

use stickslip::Gains;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_CHATTER: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] stickslip::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(
        "runs disagree on the plant: gains ({}, {}, {}) fc {} vs gains ({}, {}, {}) fc {}",
        a.0.kd, a.0.kp, a.0.ki, a.1, b.0.kd, b.0.kp, b.0.ki, b.1
    )]
    PlantMismatch { a: (Gains, f64), b: (Gains, f64) },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Config(_) | CliError::PlantMismatch { .. } => {
                EXIT_CONFIG
            }
            CliError::Sim(e) => match e {
                stickslip::Error::InvalidParameter { .. } => EXIT_CONFIG,
                stickslip::Error::DivergenceDetected { .. } => EXIT_DIVERGENCE,
                stickslip::Error::ChatterDetected { .. } => EXIT_CHATTER,
                _ => EXIT_FAILURE,
            },
            CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
