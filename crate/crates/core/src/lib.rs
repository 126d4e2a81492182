//! Exact sampling of extremum triplets for Gaussian approximations of Lévy processes, with MC and MLMC estimators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod brownian;
pub mod error;
pub mod estimator;
pub mod levy;
pub mod payoff;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod special;
pub mod stats;
pub mod triplet;

pub use error::{Result, SbgError};
pub use levy::{
    CutoffQuantities, JumpMeasure, KouParams, LevyModel, MertonParams, ModelSpec, RegularityProfile, RegularitySpec,
    TailSampler, TemperedStableParams, WatanabeParams,
};
pub use scalar::Scalar;
pub use triplet::{CoupledPair, ExtremumTriplet, Orientation};
pub use sampler::{
    coupled_increments, coupled_jd_triplets, sample_triplet, sbg_coupled_triplets, stick_breaking, CouplingPlan,
    StickBreaking,
};
pub use bounds::{ClassTag, LevelBounds, LevelContext, PayoffClass};
pub use payoff::{post_transform, Payoff, PayoffFn, PayoffKind, Transform, Transformed};
pub use estimator::{
    allocate_samples, geometric_rate, level_stats, mc_estimate, mc_plan, mlmc_estimate, mlmc_plan, mlmc_schedule,
    scan_levels, schedule_exponent, CostModel, EstimateReport, EstimatorSettings, LevelReport, LevelSchedule, LevelStats,
    McPlan, ScanRow,
};
pub use brownian::sample_bm_min_triplet;

/// Double-precision triplet.
pub type Triplet = ExtremumTriplet<f64>;
/// Double-precision coupled pair.
pub type Pair = CoupledPair<f64>;
/// Double-precision cutoff quantities.
pub type Quantities = CutoffQuantities<f64>;
