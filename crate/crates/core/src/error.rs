use thiserror::Error;

/// Errors raised by the path, metric, simulation and diagnostics layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time {t} outside the path horizon [{t0}, {t1}]")]
    Domain { t: f64, t0: f64, t1: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("horizon mismatch: [{a0}, {a1}] vs [{b0}, {b1}]")]
    HorizonMismatch { a0: f64, a1: f64, b0: f64, b1: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matching would need {cells} DP cells (limit {limit}); try mesh >= {suggested_mesh:.3e}")]
    Resource {
        cells: u64,
        limit: u64,
        suggested_mesh: f64,
    },

    #[error("ensemble too small: {n} paths (need at least {min})")]
    EnsembleTooSmall { n: usize, min: usize },

    #[error("jump law provides neither a characteristic function nor a sampler")]
    MissingJumpLaw,

    #[error("decomposition unavailable: {0}")]
    DecompositionUnavailable(String),

    #[error("kernel is not of diagonal form")]
    NotDiagonal,

    #[error("matrix exponential overflow: {0}")]
    MatrixExpOverflow(String),

    #[error("path seed {seed}: {source}")]
    AtSeed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_seed(self, seed: u64) -> Self {
        Error::AtSeed {
            seed,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
