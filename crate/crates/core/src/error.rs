use thiserror::Error;

use crate::metric::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),

    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("distance matrix is not square or labels do not match: {0}")]
    Shape(String),

    #[error("distance matrix violates the metric axioms ({} violations)", .0.violations.len())]
    InvalidMetric(ValidationReport),

    #[error("scale factor must be positive, got {0}")]
    NonpositiveScale(f64),

    #[error("matrix is numerically singular (rcond estimate {rcond:e})")]
    SingularMatrix { rcond: f64 },

    #[error("magnitude undefined: {0}")]
    MagnitudeUndefined(Box<Error>),

    #[error("space is not homogeneous: row {row} has a different distance multiset than row 0")]
    NotHomogeneous { row: usize },

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
