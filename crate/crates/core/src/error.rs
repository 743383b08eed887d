use thiserror::Error;

/// Errors raised by the design library.
#[derive(Debug, Error)]
pub enum DesignError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("column {0} is the zero vector")]
    ZeroColumn(usize),
    #[error("column {index} has norm {norm}, expected unit norm")]
    NotUnitNorm { index: usize, norm: f64 },
    #[error("configuration is entirely zero")]
    AllZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("probe list is empty")]
    EmptyProbes,
    #[error("retraction step cancels column {0}")]
    DegenerateStep(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DesignError>;
