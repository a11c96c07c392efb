use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Probability vector does not sum to one within tolerance.
    #[error("distribution not normalized: sum = {sum:.17e} (tolerance {tolerance:e})")]
    Normalization { sum: f64, tolerance: f64 },

    #[error("negative probability {value:e} at index {index} in a non-signed distribution")]
    NegativeEntry { index: usize, value: f64 },

    /// Mean click number at or above the number of bins; the response is undefined.
    #[error("detector saturated: mean clicks {kbar} with {n_bins} bins")]
    Saturation { kbar: f64, n_bins: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
