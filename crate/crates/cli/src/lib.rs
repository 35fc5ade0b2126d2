//! Config-driven front end for `pdmiso`: density, field and verification
//! runs exported as CSV, PGM and a tab-separated report.

pub mod commands;
pub mod output;
pub mod scenario;

pub use commands::{run_density, run_field, run_verify, Check, Options, Report};
pub use scenario::Scenario;

/// Failures with their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<pdmiso::Error> for CliError {
    fn from(e: pdmiso::Error) -> Self {
        match e {
            pdmiso::Error::InvalidParameter(msg) => CliError::Config(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
