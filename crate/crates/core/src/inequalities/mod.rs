//! Residual checks of the functional inequalities: Li–Yau, the semigroup gradient
//! estimate, Bakry–Ledoux, Gaussian bounds, Hessian and harmonic-gradient estimates,
//! and Lipschitz improvement.

mod local;
mod semigroup;

pub use local::{
    check_harmonic, discrete_hessian, edge_lipschitz, harmonic_gradient_bound_check, hessian_estimate_check,
    lipschitz_improvement_check, vertex_hessians, HarmonicGradient, HessianCheck, LipschitzImprovement,
};
pub use semigroup::{
    bakry_ledoux_residual, bl_scalar_margin, gaussian_bound_fit, gradient_estimate_check, li_yau_residual, BakryLedoux,
    GaussianFit, GradientEstimate,
};
