use thiserror::Error;

use crate::sequence::ParseError;
use crate::waveform::Unit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical precondition (sampling rate, window placement, ...) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A model or bias configuration is physically inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: Unit, found: Unit },

    #[error(transparent)]
    Parse(#[from] ParseError),

    /// A sequence program failed validation before execution.
    #[error("sequence validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
