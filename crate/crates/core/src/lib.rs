// `!(x > 0.0)` is deliberate so NaN fails the check; index loops follow the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod discretize;
pub mod error;
pub mod functionals;
pub mod index_forms;
pub mod linalg;
pub mod quadrature;
pub mod radial_ode;
pub mod robin_solver;
pub mod spaceform;
pub mod suites;
pub mod surfaces;

pub use error::{Error, ErrorClass, Result};
pub use spaceform::{AmbientSpace, Kind};
