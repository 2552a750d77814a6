use thiserror::Error;

use crate::pde::SolveReport;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, grids or flags supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),

    /// A closed-form surface was evaluated outside its natural domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was applied to a value it does not accept.
    #[error("usage error: {0}")]
    Usage(String),

    /// An integrator could not meet its accuracy requirement.
    #[error("numerical accuracy error: {0}")]
    Accuracy(String),

    /// Newton/continuation failed; the partial report is kept for diagnosis.
    #[error("solver error: {message}")]
    Solver {
        message: String,
        report: Box<SolveReport>,
    },

    /// The sparse linear solve failed.
    #[error("linear solver error: {0}")]
    Linear(String),

    /// A converged solution violates a property it must satisfy.
    #[error("postcondition error: {0}")]
    Postcondition(String),

    /// Bracketing of the ellipsoid radius failed.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// The coefficient search did not reach the requested tolerance.
    #[error("inversion error: {message} (best residual {best_residual:.3e} at {best:?})")]
    Inversion {
        message: String,
        best: Vec<f64>,
        best_residual: f64,
    },

    /// Successive L-schedule solves disagree by more than the certificate tolerance.
    #[error("schedule too short: relative Cauchy gap {gap:.3e} exceeds tolerance {tolerance:.1e}")]
    ScheduleTooShort { gap: f64, tolerance: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
