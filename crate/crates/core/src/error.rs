use thiserror::Error;

/// Errors raised by the hyperhaar library.
#[derive(Debug, Error)]
pub enum HyperHaarError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coincidence: rectangles {first} and {second} share side {axis}")]
    Coincidence {
        first: usize,
        second: usize,
        axis: usize,
    },

    #[error("grid resolution {requested:?} cannot resolve {what}")]
    InsufficientResolution { requested: Vec<u32>, what: String },

    #[error("capacity exceeded: {bits} grid bits requested, limit is {limit}")]
    Capacity { bits: u32, limit: u32 },

    #[error("mode mismatch: {0} vs {1}")]
    ModeMismatch(&'static str, &'static str),

    #[error("missing sign for rectangle {0}")]
    MissingSign(String),

    #[error("block index {t} out of range 1..={q}")]
    BlockOutOfRange { t: usize, q: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("graph is not admissible: {0}")]
    NotAdmissible(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("certificate undefined: {0}")]
    CertificateUndefined(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HyperHaarError>;
