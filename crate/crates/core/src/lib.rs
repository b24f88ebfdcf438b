//! Hierarchical random matrices on the dyadic ultrametric tree: geometry,
//! sampling, a dense Hermitian eigensolver, spectral observables and the
//! numerical experiments built from them.

pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod hierarchy;
pub mod matrix;
pub mod observables;
pub mod scalar;
pub mod spectral;
pub mod stats;
pub mod table;

pub use error::{Error, Result};
