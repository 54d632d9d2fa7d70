//! Gumbel-Softmax (Concrete) relaxation: simplex-valued soft samples,
//! straight-through hard/soft pairs, and the lambda/T interaction.

use alloc::vec::Vec;

use crate::dist::GumbelSoftmaxParams;
use crate::math;
use crate::rng::RngState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxError {
    NonPositiveInput,
    /// The log-convexity threshold needs at least two classes.
    TooFewClasses,
}

impl core::fmt::Display for RelaxError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::NonPositiveInput => write!(f, "temperatures must be positive and finite"),
            Self::TooFewClasses => write!(f, "need at least two classes"),
        }
    }
}

impl core::error::Error for RelaxError {}

/// A simplex-valued relaxation of a one-hot draw: softmax of
/// (log theta + G)/lambda. Keeps the Gumbel noise so estimator code can
/// replay the same randomness through other paths.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SoftSample {
    weights: Vec<f64>,
    lambda: f64,
    noise: Vec<f64>,
}

impl SoftSample {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    /// Index of the largest weight, lowest index winning ties; equals the
    /// Gumbel-max draw under the same noise for every lambda.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }
}

/// A hard one-hot draw paired with the soft sample it was taken from, as
/// consumed by the straight-through estimator: the hard vector feeds the
/// forward value, the soft one the gradient path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StGsSample {
    hard: Vec<f64>,
    soft: SoftSample,
}

impl StGsSample {
    pub fn hard(&self) -> &[f64] {
        &self.hard
    }

    pub fn soft(&self) -> &SoftSample {
        &self.soft
    }

    pub fn hard_index(&self) -> usize {
        self.soft.argmax()
    }
}

/// Soft sample from explicit standard Gumbel noise: softmax over
/// (log theta_i + g_i)/lambda with max subtraction, since small lambda
/// inflates the scaled logits far beyond exp's range.
pub fn gs_sample_with_noise(p: &GumbelSoftmaxParams, noise: &[f64]) -> SoftSample {
    let c = p.base();
    assert_eq!(noise.len(), c.len(), "noise length must match");
    let scaled: Vec<f64> = (0..c.len())
        .map(|i| (c.effective_logit(i) + noise[i]) / p.lambda())
        .collect();
    let m = scaled.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
    let unnorm: Vec<f64> = scaled.iter().map(|&v| math::exp(v - m)).collect();
    let total: f64 = unnorm.iter().sum();
    SoftSample {
        weights: unnorm.iter().map(|&w| w / total).collect(),
        lambda: p.lambda(),
        noise: noise.to_vec(),
    }
}

/// Soft sample with fresh noise, one uniform per class in index order (the
/// same correspondence as [`crate::sampling::perturb`], so the two can
/// share a stream).
pub fn gs_sample(p: &GumbelSoftmaxParams, mut rng: RngState) -> (SoftSample, RngState) {
    let n = p.base().len();
    let mut noise = Vec::with_capacity(n);
    for _ in 0..n {
        let (u, next) = rng.next_uniform();
        rng = next;
        noise.push(-math::ln_neg_ln(u));
    }
    (gs_sample_with_noise(p, &noise), rng)
}

/// Straight-through pair from explicit noise.
pub fn st_gs_sample_with_noise(p: &GumbelSoftmaxParams, noise: &[f64]) -> StGsSample {
    let soft = gs_sample_with_noise(p, noise);
    let mut hard = alloc::vec![0.0; soft.weights().len()];
    hard[soft.argmax()] = 1.0;
    StGsSample { hard, soft }
}

/// Straight-through pair with fresh noise.
pub fn st_gs_sample(p: &GumbelSoftmaxParams, rng: RngState) -> (StGsSample, RngState) {
    let (soft, rng) = gs_sample(p, rng);
    let mut hard = alloc::vec![0.0; soft.weights().len()];
    hard[soft.argmax()] = 1.0;
    (StGsSample { hard, soft }, rng)
}

/// The single temperature a GS relaxation of a T-tempered categorical
/// behaves as: lambda / T. Relaxing logits a/T at temperature lambda is,
/// under noise scaled by T, the same map as relaxing logits a at
/// temperature lambda T.
pub fn effective_gs_temperature(boltzmann_t: f64, lambda: f64) -> Result<f64, RelaxError> {
    if !boltzmann_t.is_finite() || boltzmann_t <= 0.0 || !lambda.is_finite() || lambda <= 0.0 {
        return Err(RelaxError::NonPositiveInput);
    }
    Ok(lambda / boltzmann_t)
}

/// Largest lambda at which the GS density stays log-convex, 1/(N-1); below
/// it no mode can sit in the interior of the simplex.
pub fn log_convexity_bound(n: usize) -> Result<f64, RelaxError> {
    if n < 2 {
        return Err(RelaxError::TooFewClasses);
    }
    Ok(1.0 / (n - 1) as f64)
}
