//! Crate-wide error type and result alias.
//!
//! Errors fall into four externally visible categories, each with its own
//! process exit code so scripted callers can tell them apart:
//!
//! * configuration / precondition violations (exit 2)
//! * malformed or inconsistent data (exit 3)
//! * training divergence (exit 4)
//! * failed verification checks (exit 5)

use thiserror::Error;

use crate::model::TrainReport;

/// Exit code for invalid configuration or violated preconditions.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for malformed or inconsistent data files.
pub const EXIT_DATA: i32 = 3;
/// Exit code for non-finite risk during training.
pub const EXIT_DIVERGED: i32 = 4;
/// Exit code for a failed verification check.
pub const EXIT_CHECK: i32 = 5;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or violated operation precondition.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed file contents or inconsistent dataset shapes.
    #[error("data error: {0}")]
    Data(String),

    /// Training produced a non-finite risk, gradient, or parameter.
    /// Carries the partial report accumulated up to the failing step.
    #[error("training diverged at step {step}: {reason}")]
    Diverged {
        step: usize,
        reason: String,
        report: Box<TrainReport>,
    },

    /// One or more verification checks failed.
    #[error("verification failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => EXIT_CONFIG,
            Error::Data(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_DATA,
            Error::Diverged { .. } => EXIT_DIVERGED,
            Error::CheckFailed(_) => EXIT_CHECK,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for a configuration error with a formatted message.
macro_rules! config_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Config(format!($($arg)*))
    };
}

/// Shorthand for a data error with a formatted message.
macro_rules! data_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Data(format!($($arg)*))
    };
}

pub(crate) use {config_err, data_err};
