use std::path::PathBuf;

/// Errors produced by instance construction, data loading and the solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("instance must have at least one row and one column (got {rows}x{cols})")]
    EmptyInstance { rows: usize, cols: usize },

    #[error("label at row {row} must be exactly +1 or -1 (got {value})")]
    InvalidLabel { row: usize, value: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty dataset file: {0}")]
    EmptyFile(PathBuf),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("perturbation leaves the stability ball: ||x' - x||_1 = {norm} > 1/(2M) = {radius}")]
    OutsideStabilityBall { norm: f64, radius: f64 },

    #[error("support does not cover the nonzero entries of the starting point")]
    SupportMismatch,

    #[error("no separable subset: every row is misclassified by the warmup direction")]
    NoSeparableSubset,

    #[error("separable generation infeasible: margin {margin} rejected {attempts} draws")]
    GenerationInfeasible { margin: f64, attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
