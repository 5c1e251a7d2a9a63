//! Batch driver for the lattice laboratory: parses experiment configs,
//! runs the selected analyses, and writes deterministic reports.
//!
//! Exit codes: `0` success, `2` configuration error (unparseable file,
//! undefined reference, unknown task), `3` failed mathematical
//! precondition or cap violation, `4` internal invariant failure.

pub mod config;
pub mod explain;
pub mod runner;

pub use config::{parse_config, ExperimentConfig, Task};
pub use runner::{run_config, RunOutcome};

use latlab_core::Error as CoreError;
use std::fmt;

/// Exit code 2: the configuration itself is invalid.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code 3: a mathematical precondition or cap was violated.
pub const EXIT_PRECONDITION: i32 = 3;
/// Exit code 4: an internal invariant failed.
pub const EXIT_INTERNAL: i32 = 4;

/// A runner failure carrying its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }

    /// Classifies a core library error: invariant breaches are internal,
    /// everything else is a violated precondition or cap.
    pub fn from_core(err: CoreError) -> Self {
        match err {
            CoreError::Invariant(_) => CliError::internal(err.to_string()),
            other => CliError::precondition(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::internal(format!("i/o failure: {err}"))
    }
}
