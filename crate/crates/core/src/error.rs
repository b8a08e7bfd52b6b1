//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("empty batch")]
    EmptyBatch,

    #[error("non-finite gradient in tensor {tensor}")]
    NonFiniteGradient { tensor: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),

    #[error("device {device} out of coverage")]
    OutOfCoverage { device: usize },

    #[error("zero transmission rate for device {device}")]
    ZeroRate { device: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("instance too large for exhaustive search: {0} candidate plans")]
    InstanceTooLarge(u128),

    #[error("insufficient data: need {needed} flows, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("csv schema error: missing column {0}")]
    MissingColumn(String),

    #[error("csv parse error at line {line}: {message}")]
    CsvRow { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
