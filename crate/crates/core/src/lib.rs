//! Gumbel-based sampling and gradient estimation for categorical
//! distributions.
//!
//! The crate covers the whole family: the Gumbel-max trick and its
//! scaled-noise and sub-domain variants, top-down (conditional) sampling
//! with truncated Gumbels, Gumbel-top-k sampling without replacement with
//! exact Plackett-Luce reference probabilities, the Gumbel-Softmax
//! relaxation, and the REINFORCE / pathwise / straight-through gradient
//! estimators. A small statistics module (chi-square, Kolmogorov-Smirnov,
//! moment checks) backs the distributional claims with runnable tests.
//!
//! Everything is deterministic: samplers take an explicit [`rng::RngState`]
//! value and hand back its successor, so results are pure functions of
//! `(seed, stream)`.
//!
//! `no_std` with `alloc`; floating-point math goes through `libm`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dist;
pub mod estimators;
pub mod math;
pub mod relax;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod topdown;
pub mod wor;

pub use dist::{
    exponential_icdf, CategoricalParams, DistError, GumbelParams, GumbelSoftmaxParams,
    TruncGumbelParams,
};
pub use estimators::{
    analytic_grad, gs_grad, reinforce_grad, st_gs_grad, variance_report, EstimatorKind,
    EstimatorReport, Objective, PayoffForm, VarianceRow,
};
pub use relax::{gs_sample, log_convexity_bound, st_gs_sample, SoftSample, StGsSample};
pub use rng::RngState;
pub use sampling::{
    exponential_race, gumbel_max, gumbel_max_scaled, gumbel_max_subdomain,
    inverse_transform_sample, perturb, DrawResult, IndexSubset, PerturbedLogits, SampleError,
};
pub use stats::{
    chi_square_gof, chi_square_two_sample, ks_one_sample, ks_two_sample, moment_check, GofResult,
    StatsError, DEFAULT_ALPHA,
};
pub use topdown::{
    complete_condition, conditional_perturbed_logits, lazy_tree_topk, transform_to_truncated,
    LogitTree, PartitionStrategy, TopDownCondition, TopDownConstruction, TopDownError, TopDownNode,
};
pub use wor::{
    gumbel_topk, plackett_luce_prob, rejection_wor, sequential_wor, unordered_set_prob, TopKResult,
    WorError,
};
