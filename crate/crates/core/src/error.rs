use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree {0}: must be odd and at least 1")]
    InvalidDegree(usize),
    #[error("mesh too coarse: {cells} cells cannot carry degree {degree} (need at least {min})")]
    MeshTooCoarse {
        degree: usize,
        cells: usize,
        min: usize,
    },
    #[error("basis index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("coordinate {0} outside the reference interval [0, 1]")]
    CoordinateOutOfRange(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("nonpositive coefficient c^2 = {value:e} at {location:?}")]
    NonpositiveCoefficient { value: f64, location: Vec<f64> },
    #[error("PCG did not reach relative residual {tol:e} in {iterations} iterations (residual {residual:e})")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        tol: f64,
    },
    #[error("preconditioner breakdown: {0}")]
    PreconditionerBreakdown(String),
    #[error("eigensolver failed to converge: {0}")]
    EigenNoConvergence(String),
    #[error("fast path unavailable: {0}")]
    FastPathUnavailable(String),
    #[error("non-finite state at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than a failed solve.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDegree(_)
                | Error::MeshTooCoarse { .. }
                | Error::IndexOutOfRange { .. }
                | Error::CoordinateOutOfRange(_)
                | Error::DimensionMismatch { .. }
                | Error::NonpositiveCoefficient { .. }
                | Error::FastPathUnavailable(_)
                | Error::InvalidConfig(_)
                | Error::Json(_)
        )
    }
}
