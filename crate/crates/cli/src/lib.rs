//! Library side of the `ou-lab` command: configuration, the `verify`,
//! `evolve` and `report` runs, and artifact output.
//!
//! Exit statuses: `0` when every check passes, `1` when a mathematical check
//! fails (including loss of positivity along a trajectory), `2` for
//! configuration and environment errors (including the node budget).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod report;
pub mod run;

pub use config::Config;
pub use run::{run_evolve, run_report, run_verify, RunOptions, RunOutcome};

use ou_lab_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("check failed: {0}")]
    Math(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::PositivityLost { .. }
            | CoreError::InvalidCertificate { .. }
            | CoreError::NonPositiveFisher { .. }
            | CoreError::CertificateGridMismatch { .. } => CliError::Math(e.to_string()),
            CoreError::DimensionMismatch { .. }
            | CoreError::NodeBudgetExceeded { .. }
            | CoreError::NegativeTime(_)
            | CoreError::DimensionOutOfRange { .. }
            | CoreError::InvalidParameter { .. }
            | CoreError::TooFewTimePoints { .. } => CliError::Config(e.to_string()),
        }
    }
}
