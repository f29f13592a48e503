use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid law parameters: {0}")]
    InvalidLaw(String),
    #[error("empty data set")]
    EmptyDataSet,
    #[error("empty candidate grid")]
    EmptyGrid,
    #[error("force has nonzero mean (no periodic stationary balance exists)")]
    NonzeroMeanForce,
    #[error("constraint residual {residual:.3e} exceeds {limit:.3e}")]
    ConstraintResidualTooLarge { residual: f64, limit: f64 },
    #[error("inner solve exceeded its iteration budget (grad norm {grad_norm:.3e})")]
    InnerSolveDiverged { grad_norm: f64 },
    #[error("no positive separator found on the witness grid for {0}")]
    WitnessSearchFailed(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
