//! Sparse and dense linear algebra used by the spectral and harmonic solvers.

mod dense;
mod skyline;
mod sparse;
mod subspace;

pub use dense::{small_cholesky, sym_eigen, SymEigen};
pub use skyline::{rcm_order, EnvelopeCholesky};
pub use sparse::CsrMatrix;
pub use subspace::{smallest_eigenpairs, SubspaceOptions, SubspaceResult};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
