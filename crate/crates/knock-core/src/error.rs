//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the knock toolkit.
///
/// The variants are grouped by how a caller should react: `Format`, `Io` and
/// `Json` indicate malformed or unreadable inputs, while the remaining
/// variants indicate numeric preconditions that the data failed to meet.
#[derive(Debug, Error)]
pub enum Error {
    /// A file or byte stream does not match the expected layout.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A value lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented call precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A requested interval lies outside the available data.
    #[error("out of range: {0}")]
    Range(String),

    /// The input admits no meaningful answer (zero variance, collapsed fit).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
