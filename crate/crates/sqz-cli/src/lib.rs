//! Configuration, output formats, and runners behind the `sqz` binary.

// Guards written as `!(x > 0.0)` intentionally reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

use thiserror::Error;

/// Process-level error with the documented exit codes:
/// 1 statistical-comparison failure, 2 configuration error,
/// 3 numerical-convergence error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("statistical comparison failed: {0}")]
    Statistics(String),
    #[error("numerical convergence failure: {0}")]
    Numerics(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Statistics(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerics(_) => 3,
        }
    }
}

impl From<sqz_core::Error> for CliError {
    fn from(err: sqz_core::Error) -> Self {
        match err {
            sqz_core::Error::Convergence { .. } | sqz_core::Error::Accuracy { .. } => {
                CliError::Numerics(err.to_string())
            }
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Config(format!("io: {err}"))
    }
}
