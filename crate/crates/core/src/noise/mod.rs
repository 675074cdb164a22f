//! Haar-series red noise and the vector forcing built from it.

mod donsker;
mod force;
mod haar;
mod path;

pub use donsker::{donsker_process, sample_donsker};
pub use force::{weighted_norm, ForceProfile, ForcingSpec};
pub use haar::{count_up_to, dyadic_inner_product, haar_eval, orthonormality_defect, HaarIndex, MAX_LEVEL};
pub use path::{cell_count, sample_path, HaarNoisePath, NoiseDensity, RedNoiseSpec};
