use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported matrix dimension {0} (expected 2, 4 or 8)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("invalid site {0} (sites are numbered 1..=3)")]
    InvalidSite(u8),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("{what}: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    CheckFailed { what: String, deviation: f64, tolerance: f64 },
    #[error("negative three-spin coupling λ = {0}; compile the mirrored sequence via site exchange")]
    NegativeLambda(f64),
    #[error("malformed pulse op: {0}")]
    MalformedOp(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
