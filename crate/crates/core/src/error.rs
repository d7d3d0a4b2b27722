use std::path::PathBuf;

/// Errors raised by instance construction, the inference routines and the
/// experiment driver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("class count k = {0} must be at least 2")]
    ClassCount(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("label {label} out of range for k = {k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("k^n = {k}^{n} exceeds the enumeration cap {cap}")]
    EnumerationCap { k: usize, n: usize, cap: u128 },

    #[error("k^n = {k}^{n} does not fit in 128 bits")]
    ConfigurationSpaceOverflow { k: usize, n: usize },

    #[error("sampled graph has no edges; cannot rescale to coupling strength {0} (try another seed)")]
    EmptyGraph(f64),

    #[error("rejection sampling gave up after {0} attempts")]
    RejectionExhausted(u64),

    #[error("pixel count {pixels} exceeds the cap {cap}")]
    PixelCap { pixels: usize, cap: usize },

    #[error("malformed image {path:?}: {reason}")]
    Image { path: PathBuf, reason: String },

    #[error("malformed instance: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
