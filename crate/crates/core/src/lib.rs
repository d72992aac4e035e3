//! Finite-element laboratory for mixed Steklov-Dirichlet eigenvalue problems
//! on planar domains.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod eigensolve;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod meshing;
pub mod optimizer;
pub mod provenance;
pub mod quadrature;

pub use error::{Error, Result};
pub use exec::Execution;
