use thiserror::Error;

/// Errors raised by the numerical and structural operations of this crate.
///
/// Check failures are never errors; they are reported through
/// [`CheckReport`](crate::report::CheckReport).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (left {left:?}, right {right:?})")]
    DimensionMismatch {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error(
        "shape mismatch in matrix list: expected {expected:?}, found {found:?} at index {index}"
    )]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
        index: usize,
    },

    #[error("module space mismatch: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: relative defect {defect:e} exceeds {tolerance:e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("matrix is not unitary: defect {defect:e} exceeds {tolerance:e}")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
