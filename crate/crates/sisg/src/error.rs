//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("degenerate element {element} (signed area {area:.3e})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("field evaluation produced a non-finite value at ({x}, {y})")]
    SingularEvaluation { x: f64, y: f64 },

    #[error("exact field has no gradient, required by this operation")]
    MissingGradient,

    #[error("solver did not converge: {iterations} iterations, relative residual {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("non-positive diagonal entry {value:.3e} at row {row}")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("mesh file, line {line}: {message}")]
    MeshFormat { line: usize, message: String },

    #[error("reference term vanished while the error term did not (lhs {lhs:.3e})")]
    ZeroReference { lhs: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 for usage problems, 2 for numerical
    /// or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::IndexOutOfRange { .. } => 1,
            _ => 2,
        }
    }
}
