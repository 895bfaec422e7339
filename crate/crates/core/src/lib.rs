//! Piecewise-constant intensity estimation for counting processes.
//!
//! Events observed on `(0, 1]` from `n` independent replicates are binned on a
//! uniform grid of `m` bins and denoised with a weighted total-variation
//! penalty. The penalized least-squares problem is exactly the proximal
//! operator of the weighted TV norm, which [`tvprox::prox_weighted_tv`] solves
//! in a single linear-time sweep. Jumps of the solution are the estimated
//! change-points of the intensity.
//!
//! Modules:
//! - [`tvprox`]: weighted TV proximal operator and KKT certificate.
//! - [`weights`]: data-driven Bernstein-type edge weights.
//! - [`estimator`]: binning, fitting and change-point extraction.
//! - [`simulate`]: exact simulation of piecewise-constant Poisson intensities.
//! - [`evaluate`]: MISE, empirical risk, Hausdorff distances, cross-validation.

pub mod error;
pub mod estimator;
pub mod evaluate;
pub mod simulate;
pub mod tvprox;
pub mod weights;

pub use error::{Error, Result};
pub use estimator::{bin_counts, fit, intensity_from_beta, EventSeries, FitResult, StepFunction};
pub use evaluate::{
    cross_validate_scale, empirical_risk, hausdorff_one_sided, mise, CvConfig, CvOutcome,
    WeightMode,
};
pub use simulate::{example_intensity, sample_events, SimulationConfig};
pub use tvprox::{
    kkt_residual, prox_weighted_tv, tail_sum_violation, BinnedSignal, ProxSolution, WeightVector,
};
pub use weights::{
    bernstein_constants, data_driven_weights, tail_statistics, uniform_weights, TailStatistics,
    WeightConfig,
};
