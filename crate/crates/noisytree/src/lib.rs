//! Learning tree-structured Ising and Gaussian models from samples whose
//! nodes are corrupted by independent, non-identical noise.
//!
//! Recovery is only possible up to an equivalence class of trees; the
//! [`recovery`] module returns a member of that class using quartet tests
//! from [`quartet`]. [`theory`] holds the sample-complexity bounds and the
//! error-exponent solver, and [`harness`] runs Monte Carlo experiments.

mod bfgs;
pub mod error;
pub mod harness;
pub mod model;
pub mod quartet;
pub mod recovery;
pub mod sim;
pub mod theory;
pub mod tree_core;

pub use error::{Error, Result};
pub use model::CorrelationMatrix;
pub use tree_core::TreeStructure;
