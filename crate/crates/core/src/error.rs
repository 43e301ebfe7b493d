use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("multiplier {nu} puts fractile {fractile} of period {period} outside [0, 1]")]
    MultiplierOutOfRange { nu: f64, period: usize, fractile: f64 },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("degenerate sample in period {period}: zero variance or zero mean")]
    DegenerateSample { period: usize },

    #[error("ambiguity set is empty")]
    EmptyAmbiguitySet,

    #[error("family mismatch: expected {expected}, got {got}")]
    FamilyMismatch { expected: &'static str, got: &'static str },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
