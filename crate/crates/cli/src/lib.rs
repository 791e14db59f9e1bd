//! Library half of the `sip` binary: configuration, commands and exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a property check failed |
//! | 2 | the config could not be read or parsed |
//! | 3 | the problem, parameters or checkpoints are invalid |
//! | 4 | the solver hit a non-finite value; a partial report is written |

pub mod commands;
pub mod config;

use thiserror::Error;

pub use config::{Format, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{0} property check(s) failed")]
    PropertyFailure(usize),
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::PropertyFailure(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}
