//! Sparse storage, envelope factorizations and dense eigen helpers.

mod dense;
mod envelope;
mod sparse;
mod subspace;

pub use dense::{generalized_eigen, sym_eigen, Eigen};
pub use envelope::{inertia, Inertia, Ldlt};
pub use sparse::{rcm_order, Csr, Triplets};
pub use subspace::lowest_pencil_eigen;
