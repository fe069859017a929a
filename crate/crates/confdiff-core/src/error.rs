//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by estimators, generators, models, and training runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidInput(String),
    /// A gradient was requested from a loss that has none.
    UnsupportedGradient(&'static str),
    /// A cached intermediate no longer matches the object it was built from.
    InvalidState(String),
    /// Estimator and dataset kinds do not match.
    ConfigMismatch(String),
    /// A training run produced a non-finite value and stopped.
    AbortedRun { epoch: usize, reason: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::UnsupportedGradient(what) => {
                write!(f, "unsupported gradient: {what}")
            }
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::ConfigMismatch(msg) => write!(f, "configuration error: {msg}"),
            Error::AbortedRun { epoch, reason } => {
                write!(f, "run aborted at epoch {epoch}: {reason}")
            }
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidInput(alloc::format!("{msg}"))
    }
}
