use thiserror::Error;

/// Errors raised by the dispatch model, builders, and file readers.
#[derive(Debug, Error)]
pub enum DedError {
    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid unit {unit}: {reason}")]
    InvalidUnit { unit: usize, reason: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{value} MW lies outside the linearized range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("enumeration cap exceeded: {detail} = {count} assignments > cap {cap}")]
    EnumerationCap {
        detail: String,
        count: u128,
        cap: u128,
    },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DedError>;
