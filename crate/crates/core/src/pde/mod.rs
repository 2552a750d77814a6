//! The translator PDE: residual, linearization and the continuation solver.

mod newton;
mod operator;

pub use newton::{solve_dirichlet, ContinuationSchedule, NewtonSettings, SolveReport, StepRecord};
#[cfg(test)]
pub(crate) use operator::max_abs;
pub use operator::{
    flux_residual, linearize, linearize_flux, linearize_normalized, normalized_residual, residual,
    Discretization,
};
