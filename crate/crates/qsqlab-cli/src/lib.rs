//! Batch driver for the qsqlab experiments: each named experiment runs from an
//! [`ExperimentConfig`] and yields a [`Report`] of checked claims.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use experiments::{experiment_names, run};
pub use report::{Check, Comparison, Report, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Anything that stops an experiment before it produces a report.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Library(#[from] qsqlab::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Every error maps to exit code 2; failed checks (exit 1) are not errors.
    pub fn exit_code(&self) -> i32 {
        EXIT_ERROR
    }
}

/// Exit code for a finished report.
pub fn report_exit_code(report: &Report) -> i32 {
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
