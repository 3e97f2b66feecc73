use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Polar projection is undefined for rank-deficient input.
    #[error("rank-deficient matrix: relative smallest singular value {sigma_min:e} below {tol:e}")]
    RankDeficient { sigma_min: f64, tol: f64 },

    #[error("matrix is not unitary: defect {defect:e} exceeds tolerance {tol:e}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// Columns of the gate that are not product states, as zero-based (i, j).
    #[error("entangled columns {0:?}: the design does not factor into product vectors")]
    EntangledColumn(Vec<(usize, usize)>),

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("histograms use different measures ({0} vs {1})")]
    MeasureMismatch(String, String),

    #[error("too few samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
