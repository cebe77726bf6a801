use thiserror::Error;

/// Errors produced by model validation and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cross entropy is infinite: w[{index}] = {weight} > 0 but p[{index}] = 0")]
    InfiniteCrossEntropy { index: usize, weight: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("probability vector has a zero entry at index {index}; restrict to the positive support first")]
    ZeroProbability { index: usize },

    #[error("q = {q} exceeds the cap |q| <= {cap}; use the asymptote data instead")]
    QOutOfRange { q: f64, cap: f64 },

    #[error("empty word has no type")]
    EmptyWord,

    #[error("{what}: {count} exceeds the limit {limit}")]
    ResourceLimit { what: &'static str, count: f64, limit: f64 },

    #[error("point {q} is not interior to the domain [{lo}, {hi}]")]
    DomainBoundary { q: f64, lo: f64, hi: f64 },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("strong separation violated: images of letters {first} and {second} overlap or touch")]
    SscViolation { first: usize, second: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model schema error: {0}")]
    Schema(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
