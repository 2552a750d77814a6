//! Structured grids, masked domains, finite-difference stencils and
//! symmetry reduction.

mod domain;
mod field;
mod spec;
mod stencil;
mod symmetry;

pub use domain::{build_domain, Domain, DomainMask, Link, NodeClass, SNAP_FRACTION};
pub use field::{
    derivatives, gradient, hessian, BoundaryData, GradientField, HessianField, ScalarField,
};
pub use spec::{Axis, GridSpec, MAX_DIM};
pub(crate) use stencil::Stencils;
pub(crate) use symmetry::reflect_onto;
pub use symmetry::{
    full_grid, reduce_mask, reduce_to_octant, reduced_grid, reflect_full, SymmetryFlags,
};
