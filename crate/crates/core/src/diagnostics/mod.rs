//! Empirical checks of the hypotheses and of the mixing conclusion.

mod coupled;
mod hypotheses;
mod mixing;
mod noise_check;
mod observables;
mod stats;

pub use coupled::{
    base_points, contraction_scan, coupled_steps, marginal_law_distance, BasePoint, ContractionReport,
    MarginalLawReport, StepSample,
};
pub use hypotheses::{
    h3_rank_scan, verify_absorbing, verify_zero_stability, AbsorbingReport, RankScanReport, ZeroStabilityReport,
    RANK_THRESHOLD,
};
pub use mixing::{mixing_distance, MixRateReport, MIN_ENSEMBLE, MIN_R2};
pub use noise_check::{noise_check, NoiseCheckReport};
pub use observables::{Observable, ObservableSet};
pub use stats::{
    fit_exponential, ks_one_sample, ks_two_sample, linear_fit, median, wasserstein1, ExponentialFit, LinearFit,
    MIN_FIT_POINTS,
};
