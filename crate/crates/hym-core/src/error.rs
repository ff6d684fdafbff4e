//! Error types shared by every module of the crate.

use thiserror::Error;

/// Errors raised by field operations, curvature operators and solvers.
#[derive(Debug, Error)]
pub enum HymError {
    /// Two fields do not live on the same grid, or ranks disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A holomorphic index was out of range.
    #[error("index {index} out of range (complex dimension {n})")]
    Index { index: usize, n: usize },

    /// An operation required a Hermitian-flagged field.
    #[error("operand is not Hermitian-flagged: {0}")]
    NotHermitian(String),

    /// A field that must be positive definite failed the check.
    /// Reports the worst grid point and its smallest eigenvalue.
    #[error("positivity failure at grid point {point}: lambda_min = {lambda_min:.6e}")]
    NotPositive { point: usize, lambda_min: f64 },

    /// Poisson right-hand side was not mean-zero within tolerance.
    #[error("right-hand side is not mean-zero: integral = {integral:.6e} exceeds tolerance {tol:.6e}")]
    NotMeanZero { integral: f64, tol: f64 },

    /// A precondition of an operation was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A hypothesis needed for solvability fails (e.g. non-positive total
    /// reference curvature, or a negative-mean prescription).
    #[error("obstruction: {0}")]
    Obstruction(String),

    /// The bisection bracket for the two-solution pipeline could not be
    /// established even after amplitude rescaling.
    #[error("bracket failure: {0}")]
    Bracket(String),

    /// Geometry construction rejected the requested grid.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A persisted HYMF file was malformed.
    #[error("malformed HYMF data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, HymError>;
