use std::path::PathBuf;

/// Errors produced by every module in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("conflicting duplicate edge ({u}, {v}): weight {first} vs {second}")]
    ConflictingEdge {
        u: String,
        v: String,
        first: f64,
        second: f64,
    },

    #[error("input contains no data")]
    EmptyInput,

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix declared symmetric but |A[{row},{col}] - A[{col},{row}]| exceeds tolerance")]
    NotSymmetric { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input columns are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("linear system is singular or did not solve to tolerance")]
    SingularSystem,

    #[error("matrix must be square for this operation ({rows}x{cols} given)")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entries must be 0 or 1 for this operation (found {value} at ({row}, {col}))")]
    NotBinary { row: usize, col: usize, value: f64 },

    #[error("matrix entries must be nonnegative (found {value} at ({row}, {col}))")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("exact integer count overflowed")]
    CountOverflow,

    #[error("enumeration guard exceeded: {nodes} nodes > limit {limit}")]
    EnumerationGuard { nodes: usize, limit: usize },

    #[error("ranking needs at least one positive and one negative label")]
    SingleClass,

    #[error("partitions have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("not enough positive edges: have {have}, need at least {need}")]
    TooFewEdges { have: usize, need: usize },

    #[error("fold {fold} has no test positives")]
    EmptyFold { fold: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
