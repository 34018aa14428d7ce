//! Simulation and analysis of frustrated Lohe hermitian sphere ensembles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod guarantees;
pub mod harness;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod reductions;

pub use error::{Error, Result};
