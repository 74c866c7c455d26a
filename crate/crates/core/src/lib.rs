//! Numerical laboratory for heat kernels, Kato-type curvature constants,
//! entropy monotonicity and harmonic constructions on finite metric-measure
//! spaces discretizing closed surfaces and weighted graphs.

pub mod constructions;
pub mod convergence;
pub mod entropy;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod heat;
pub mod inequalities;
pub mod kato;
pub mod linalg;
pub mod report;

pub use error::{Error, Result};
