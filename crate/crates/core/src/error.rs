use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subsystem dimensions: {0}")]
    InvalidDims(String),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0} instead of 1")]
    TraceNotOne(f64),

    #[error("operator has negative eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("state vector has norm {0} instead of 1")]
    NotNormalized(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubset(String),

    #[error("operation needs at least {min} subsystems, state has {n}")]
    TooFewSubsystems { n: usize, min: usize },

    #[error("k = {k} is out of range for a {n}-partite state")]
    KOutOfRange { k: usize, n: usize },

    #[error("cell dimension {dim} exceeds the supported maximum {max}")]
    UnsupportedCellDim { dim: usize, max: usize },

    #[error("unsupported channel: {0}")]
    UnsupportedChannel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("optimizer failed: {0}")]
    OptimizerFailed(String),

    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("grid too coarse: {points} points, need at least {min}")]
    GridTooCoarse { points: usize, min: usize },

    #[error("series is not on a uniform, sorted p grid")]
    NonUniformGrid,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
