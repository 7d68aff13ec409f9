use thiserror::Error;

/// Errors raised by the group, walk, entropy and diagnostics layers.
///
/// The variants are grouped so that front-ends can map them onto distinct
/// exit statuses: usage and validation problems, resource exhaustion, and
/// integrity failures (a reconstruction that disagrees with the simulated
/// truth).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("family mismatch: expected {expected}, got {found}")]
    FamilyMismatch { expected: String, found: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("integrity failure: {0}")]
    Integrity(String),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
