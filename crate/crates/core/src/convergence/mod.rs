//! Finite Gromov–Hausdorff machinery, function transfer, spectral and volume convergence
//! studies, and tangent-cone probes.

mod gh;
mod studies;

pub use gh::{
    ball_gh_to_euclidean, distortion, euclidean_ball_sample, gh_distance_small, gh_upper_bound, halton,
    transfer_function, FiniteMetric, GHEstimate, GhMethod, EXHAUSTIVE_LIMIT,
};
pub use studies::{
    matched_basepoints, spectral_convergence_study, tangent_probe, volume_continuity_check, ProbeRow, SpectralStudy,
    TangentProbe, VolumeContinuity,
};
