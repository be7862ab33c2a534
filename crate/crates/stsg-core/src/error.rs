//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or parameters supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mathematically invalid input for an operation (e.g. empty positive
    /// set for a margin loss, mismatched vector lengths).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs that should have been consistent by construction were not.
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Input data failed validation; each entry names the offending location.
    #[error("annotation data invalid: {}", .0.join("; "))]
    InvalidData(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
