use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site count {0} must be even")]
    OddN(usize),

    #[error("{what} = {value} exceeds the supported limit of {limit}")]
    SizeLimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    ConvergenceFailure(String),

    #[error("invalid spin counters n_up={n_up}, n_down={n_down} for N={n}")]
    InvalidCounters {
        n_up: usize,
        n_down: usize,
        n: usize,
    },

    #[error("sample {index} lies outside the S^z = 0 sector")]
    SymmetryViolatedSample { index: usize },

    #[error("configuration {0:?} has zero amplitude")]
    ZeroAmplitudeConfig(Vec<u8>),

    #[error("landscape directions are numerically collinear")]
    DegeneratePlane,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
