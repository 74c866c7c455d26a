//! Heat semigroup and heat kernel from a mass-orthonormal eigenbasis.

mod kernel;
mod spectral;

pub use kernel::{carre_du_champ, ClampInfo, HeatKernel};
pub use spectral::{spectrum, spectrum_with, EigenMethod, SpectralData, SpectralExport, SpectrumOptions, DENSE_BLOCK_LIMIT, DENSE_LIMIT};
