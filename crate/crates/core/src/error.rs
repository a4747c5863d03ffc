use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the kernels, the hierarchy construction and the solver driver.
#[derive(Debug, Error)]
pub enum SvdAmgError {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("zero diagonal entry at row {row} in {op}")]
    ZeroDiagonal { op: &'static str, row: usize },

    #[error("zero row {row} in {op}")]
    ZeroRow { op: &'static str, row: usize },

    #[error("matrix is not symmetric: asymmetry {asymmetry:e} exceeds tolerance")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not symmetric positive definite (pivot {pivot} = {value:e})")]
    NotSpd { pivot: usize, value: f64 },

    #[error("rank deficiency in {op}: column {column} has vanishing norm")]
    RankDeficient { op: &'static str, column: usize },

    #[error("coarsest level {rows}x{cols} yields only {found} admissible triplets, {wanted} requested")]
    TooFewTriplets {
        rows: usize,
        cols: usize,
        found: usize,
        wanted: usize,
    },

    #[error("least-squares fit for F-point {point} on level {level} is singular")]
    SingularFit { level: usize, point: usize },

    #[error(
        "interpolation stencil of size {stencil} at point {point} on level {level} exceeds the \
         {available} fit vectors; restart with a larger number of test vectors"
    )]
    TooFewTestVectors {
        level: usize,
        point: usize,
        stencil: usize,
        available: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate point set: {0}")]
    DegeneratePoints(String),

    #[error("matrix market {path}: {detail}")]
    MatrixMarket { path: PathBuf, detail: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<SvdAmgError>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SvdAmgError {
    pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Self {
        SvdAmgError::DimensionMismatch {
            op,
            detail: detail.into(),
        }
    }

    /// Wraps the error with a location such as "level 2" or "triplet 5".
    pub fn context(self, context: impl Into<String>) -> Self {
        SvdAmgError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, SvdAmgError>;
