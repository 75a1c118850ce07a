//! Batch front end for the splitting simulator: TOML configs, a preset
//! library, verification suites, JSON reports, CSV norm tables and VSSF
//! snapshots.

pub mod config;
pub mod presets;
pub mod report;
pub mod runner;
pub mod snapshot;
pub mod suites;

use thiserror::Error;

pub use config::RunConfig;
pub use runner::{execute, execute_config, Command, Outcome, Overrides};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
}

impl From<vsg_core::Error> for CliError {
    fn from(e: vsg_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    SuiteFailure = 1,
    ConfigError = 2,
    NumericalAbort = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl CliError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Config(_) => ExitStatus::ConfigError,
            CliError::Io(_) | CliError::Numerical(_) => ExitStatus::NumericalAbort,
        }
    }
}
