//! Explicit constructions: heat-semigroup cut-offs, the gauging function, harmonic
//! replacement and harmonic splitting maps.

mod cutoff;
mod gauging;
mod harmonic;

pub use cutoff::{heat_cutoff, profile_cutoff, smooth_profile, CutoffReport};
pub use gauging::{gauging_function, GaugingResult};
pub use harmonic::{
    ball_with_collar, build_splitting_map, harmonic_extension, harmonic_replacement, local_coordinates,
    splitting_quality, SplittingExport, SplittingMap, SplittingQuality,
};
