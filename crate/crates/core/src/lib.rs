pub mod cli;
pub mod closed_forms;
pub mod delta_wing;
mod error;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod pde;
pub mod simplex_map;
pub mod suite;

pub use error::{Error, Result};
