//! Sparse symmetric storage, orderings and Cholesky factorization.

pub mod cholesky;
pub mod ordering;
pub mod sparse;

pub use cholesky::SparseCholesky;
pub use ordering::{nested_dissection, nested_dissection_with_trailing};
pub use sparse::{SymmetricCsc, TripletBuilder};
