use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("configuration {config:#x} has {found} particles, sector holds {expected}")]
    WrongParticleNumber { config: u64, found: u32, expected: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported boundary: {0}")]
    UnsupportedBoundary(String),
    #[error("operator too large for dense diagonalization: dim {dim} > {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    NoConvergence { iterations: usize, best_residual: f64 },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
