//! Synthetic test data and Monte-Carlo evaluation.
//!
//! Random streams are ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded per trial
//! by a splitmix64 mix of the base seed and the (level, trial) indices.

mod bump;
mod metrics;
mod montecarlo;
mod noise;
mod oracle;

pub use bump::{bump_surface, Bump, BumpSurfaceSpec};
pub use metrics::{evaluate, ks_normal, ks_p_value, standardize, TrialMetrics};
pub use montecarlo::{
    monte_carlo, standard_methods, trial_seed, GroundTruth, MetricsCell, MetricsTable,
    MonteCarloConfig, TrialRecord, DEFAULT_TIKHONOV_LAMBDA,
};
pub use noise::{
    add_noise, iid_covariance, radial_covariance, radial_profile, NoiseKind, NoiseSpec,
};
pub use oracle::{oracle_gls, stacked_operator, ORACLE_MAX_NODES};
