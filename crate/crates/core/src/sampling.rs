//! Exact categorical sampling: inverse transform, the Gumbel-max trick and
//! its scaled-noise and sub-domain variants, and the Exponential race
//! equivalence used as a cross-checking oracle.

use alloc::vec::Vec;

use crate::dist::{CategoricalParams, GumbelParams};
use crate::math;
use crate::rng::RngState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleError {
    /// Every candidate value is -inf; there is nothing to take an argmax of.
    NoFiniteValue,
    /// A subset member points outside the perturbed vector.
    IndexOutOfBounds,
}

impl core::fmt::Display for SampleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::NoFiniteValue => write!(f, "no finite value to maximize over"),
            Self::IndexOutOfBounds => write!(f, "subset index out of bounds"),
        }
    }
}

impl core::error::Error for SampleError {}

/// A nonempty, sorted, duplicate-free set of class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IndexSubset {
    members: Vec<usize>,
}

impl IndexSubset {
    pub fn new(mut members: Vec<usize>) -> Option<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            None
        } else {
            Some(Self { members })
        }
    }

    /// The full domain {0, .., n-1}.
    pub fn full(n: usize) -> Option<Self> {
        if n == 0 {
            None
        } else {
            Some(Self {
                members: (0..n).collect(),
            })
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

/// The vector log theta_i + G^(i): logits shifted by independent standard
/// Gumbel noise. Entries for -inf logits stay -inf.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedLogits {
    values: Vec<f64>,
    source: CategoricalParams,
}

impl PerturbedLogits {
    /// Combine explicit noise with the source's effective logits. Mainly
    /// for tests that share one noise vector across algorithms.
    pub fn with_noise(source: &CategoricalParams, noise: &[f64]) -> Self {
        assert_eq!(noise.len(), source.len(), "noise length must match");
        let values = noise
            .iter()
            .enumerate()
            .map(|(i, &g)| source.effective_logit(i) + g)
            .collect();
        Self {
            values,
            source: source.clone(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &CategoricalParams {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn from_parts(values: Vec<f64>, source: CategoricalParams) -> Self {
        Self { values, source }
    }
}

/// Index and value of the maximal perturbed logit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DrawResult {
    pub index: usize,
    pub max_value: f64,
}

/// Perturb every class with fresh standard Gumbel noise, one uniform per
/// class in index order. This fixed correspondence lets equivalence tests
/// replay the same randomness through different parameterizations.
pub fn perturb(c: &CategoricalParams, mut rng: RngState) -> (PerturbedLogits, RngState) {
    let mut values = Vec::with_capacity(c.len());
    for i in 0..c.len() {
        let (u, next) = rng.next_uniform();
        rng = next;
        values.push(c.effective_logit(i) - math::ln_neg_ln(u));
    }
    (PerturbedLogits::from_parts(values, c.clone()), rng)
}

/// Argmax of the perturbed logits, lowest index winning ties. The index is
/// an exact categorical sample and the value is Gumbel(log Z).
pub fn gumbel_max(pl: &PerturbedLogits) -> Result<DrawResult, SampleError> {
    argmax(pl.values().iter().copied().enumerate())
}

/// Argmax restricted to sub-domain `b`; the index follows the renormalized
/// categorical over `b`.
pub fn gumbel_max_subdomain(
    pl: &PerturbedLogits,
    b: &IndexSubset,
) -> Result<DrawResult, SampleError> {
    if b.members().iter().any(|&i| i >= pl.len()) {
        return Err(SampleError::IndexOutOfBounds);
    }
    argmax(b.members().iter().map(|&i| (i, pl.values()[i])))
}

fn argmax(values: impl Iterator<Item = (usize, f64)>) -> Result<DrawResult, SampleError> {
    let mut best: Option<DrawResult> = None;
    for (index, value) in values {
        if value == f64::NEG_INFINITY {
            continue;
        }
        match best {
            Some(ref b) if value <= b.max_value => {}
            _ => {
                best = Some(DrawResult {
                    index,
                    max_value: value,
                })
            }
        }
    }
    best.ok_or(SampleError::NoFiniteValue)
}

/// Gumbel-max with noise drawn from an arbitrary Gumbel(mu, beta).
///
/// The index then follows Cat(a, T beta) and the maximum follows
/// Gumbel(mu + beta log Z', beta) with Z' = sum exp(a_i/(T beta)). At
/// beta = 0 no noise survives and the draw degenerates to the argmax of the
/// logits (greedy/top-1 decoding); the same number of uniforms is consumed
/// so streams stay aligned across beta values.
pub fn gumbel_max_scaled(
    c: &CategoricalParams,
    noise: &GumbelParams,
    mut rng: RngState,
) -> (DrawResult, RngState) {
    let mut values = Vec::with_capacity(c.len());
    for i in 0..c.len() {
        let (u, next) = rng.next_uniform();
        rng = next;
        values.push(c.effective_logit(i) + noise.mu() - noise.beta() * math::ln_neg_ln(u));
    }
    let pl = PerturbedLogits::from_parts(values, c.clone());
    let draw = gumbel_max(&pl).expect("a finite logit exists by construction");
    (draw, rng)
}

/// Smallest index whose cumulative probability reaches `u`.
pub fn index_for_uniform(probs: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        cum += p;
        if u <= cum && p > 0.0 {
            return i;
        }
    }
    // u exceeded the accumulated total by rounding; the top bin owns it.
    last_positive
}

/// Classic inverse transform sampling on the normalized probabilities.
pub fn inverse_transform_sample(c: &CategoricalParams, rng: RngState) -> (usize, RngState) {
    let probs = c.probs();
    let (u, rng) = rng.next_uniform();
    (index_for_uniform(&probs, u), rng)
}

/// The Exponential-race formulation: class i's arrival time is
/// X_i / theta_i with X_i standard Exponential, and the winner is the
/// argmin. The winning index is an exact categorical sample and the winning
/// time is Exponential(Z).
///
/// Each class consumes one uniform in index order, the same correspondence
/// as [`perturb`], so -log(time_i) replays the perturbed logits up to
/// floating-point rounding.
pub fn exponential_race(c: &CategoricalParams, mut rng: RngState) -> (usize, f64, RngState) {
    let mut best_index = 0usize;
    let mut best_time = f64::INFINITY;
    for i in 0..c.len() {
        let (u, next) = rng.next_uniform();
        rng = next;
        let theta = math::exp(c.effective_logit(i));
        let time = -math::ln(u) / theta;
        if time < best_time {
            best_time = time;
            best_index = i;
        }
    }
    (best_index, best_time, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cat(weights: &[f64]) -> CategoricalParams {
        CategoricalParams::from_weights(weights).unwrap()
    }

    #[test]
    fn with_noise_is_additive() {
        let c = CategoricalParams::new(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let pl = PerturbedLogits::with_noise(&c, &[0.1, 1.3, -0.2]);
        assert_eq!(pl.values(), &[0.1, 1.3, -0.2]);
    }

    #[test]
    fn neg_inf_logits_stay_neg_inf() {
        let c = CategoricalParams::new(vec![0.0, f64::NEG_INFINITY], 1.0).unwrap();
        let (pl, _) = perturb(&c, RngState::new(5));
        assert!(pl.values()[0].is_finite());
        assert_eq!(pl.values()[1], f64::NEG_INFINITY);
    }

    #[test]
    fn perturb_consumes_one_uniform_per_class() {
        let c = cat(&[0.5, 0.3, 0.2]);
        let rng = RngState::new(11);
        let (_, after) = perturb(&c, rng);
        assert_eq!(after.counter(), 3);
    }

    #[test]
    fn argmax_is_deterministic() {
        let c = CategoricalParams::new(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let pl = PerturbedLogits::with_noise(&c, &[0.1, 1.3, -0.2]);
        let draw = gumbel_max(&pl).unwrap();
        assert_eq!(draw.index, 1);
        assert_eq!(draw.max_value, 1.3);
    }

    #[test]
    fn argmax_breaks_ties_toward_lowest_index() {
        let c = CategoricalParams::new(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let pl = PerturbedLogits::with_noise(&c, &[2.0, 2.0, -1.0]);
        assert_eq!(gumbel_max(&pl).unwrap().index, 0);
    }

    #[test]
    fn all_neg_inf_is_an_error() {
        let c = CategoricalParams::new(vec![0.0, 0.0], 1.0).unwrap();
        let pl = PerturbedLogits::from_parts(vec![f64::NEG_INFINITY, f64::NEG_INFINITY], c);
        assert_eq!(gumbel_max(&pl), Err(SampleError::NoFiniteValue));
    }

    #[test]
    fn translation_invariance_under_shared_noise() {
        let noise = [0.4, -1.1, 0.9, 0.05];
        let a = CategoricalParams::new(vec![1.0, 2.0, 0.5, -0.3], 1.0).unwrap();
        let b = CategoricalParams::new(vec![8.0, 9.0, 7.5, 6.7], 1.0).unwrap();
        let ia = gumbel_max(&PerturbedLogits::with_noise(&a, &noise))
            .unwrap()
            .index;
        let ib = gumbel_max(&PerturbedLogits::with_noise(&b, &noise))
            .unwrap()
            .index;
        assert_eq!(ia, ib);
    }

    #[test]
    fn subdomain_full_equals_plain() {
        let c = cat(&[0.5, 0.3, 0.2]);
        let (pl, _) = perturb(&c, RngState::new(21));
        let full = IndexSubset::full(3).unwrap();
        assert_eq!(gumbel_max_subdomain(&pl, &full), gumbel_max(&pl));
    }

    #[test]
    fn subdomain_singleton_is_forced() {
        let c = cat(&[0.5, 0.3, 0.2]);
        let (pl, _) = perturb(&c, RngState::new(22));
        let only = IndexSubset::new(vec![2]).unwrap();
        assert_eq!(gumbel_max_subdomain(&pl, &only).unwrap().index, 2);
    }

    #[test]
    fn subdomain_with_no_finite_member_errors() {
        let c = CategoricalParams::new(vec![0.0, f64::NEG_INFINITY], 1.0).unwrap();
        let (pl, _) = perturb(&c, RngState::new(23));
        let b = IndexSubset::new(vec![1]).unwrap();
        assert_eq!(
            gumbel_max_subdomain(&pl, &b),
            Err(SampleError::NoFiniteValue)
        );
        let oob = IndexSubset::new(vec![7]).unwrap();
        assert_eq!(
            gumbel_max_subdomain(&pl, &oob),
            Err(SampleError::IndexOutOfBounds)
        );
    }

    #[test]
    fn scaled_at_standard_noise_equals_plain_gumbel_max() {
        let c = cat(&[0.4, 0.35, 0.25]);
        let rng = RngState::new(99);
        let (pl, after_plain) = perturb(&c, rng);
        let plain = gumbel_max(&pl).unwrap();
        let (scaled, after_scaled) = gumbel_max_scaled(&c, &GumbelParams::standard(), rng);
        assert_eq!(plain, scaled);
        assert_eq!(after_plain, after_scaled);
    }

    #[test]
    fn scaled_at_beta_zero_is_greedy() {
        let c = CategoricalParams::new(vec![0.2, 1.5, -0.4], 1.0).unwrap();
        let zero = GumbelParams::new(0.0, 0.0).unwrap();
        for seed in 0..20 {
            let (draw, _) = gumbel_max_scaled(&c, &zero, RngState::new(seed));
            assert_eq!(draw.index, 1);
            assert_eq!(draw.max_value, 1.5);
        }
    }

    #[test]
    fn cdf_bin_lookup() {
        assert_eq!(index_for_uniform(&[0.8, 0.2], 0.9), 1);
        assert_eq!(index_for_uniform(&[0.8, 0.2], 0.5), 0);
        assert_eq!(index_for_uniform(&[1.0], 0.3), 0);
        // Zero-probability bins are skipped even at exact boundaries.
        assert_eq!(index_for_uniform(&[0.0, 1.0], 0.4), 1);
        // Rounding overflow falls into the last positive bin.
        assert_eq!(index_for_uniform(&[0.5, 0.5 - 1e-16], 1.0 - 1e-17), 1);
    }

    #[test]
    fn degenerate_categorical_always_returns_its_class() {
        let c = cat(&[1.0]);
        for seed in 0..10 {
            let (i, _) = inverse_transform_sample(&c, RngState::new(seed));
            assert_eq!(i, 0);
        }
    }

    #[test]
    fn race_replays_perturbed_logits_through_log() {
        let c = cat(&[8.0, 2.0]);
        let rng = RngState::new(77);
        let (pl, _) = perturb(&c, rng);
        let (winner, min_time, _) = exponential_race(&c, rng);
        assert_eq!(winner, gumbel_max(&pl).unwrap().index);
        let winner_value = pl.values()[winner];
        assert!((-math::ln(min_time) - winner_value).abs() < 1e-9);
    }

    #[test]
    fn index_subset_normalizes_members() {
        let s = IndexSubset::new(vec![3, 1, 3, 2]).unwrap();
        assert_eq!(s.members(), &[1, 2, 3]);
        assert!(s.contains(2));
        assert!(!s.contains(0));
        assert!(IndexSubset::new(vec![]).is_none());
        assert!(IndexSubset::full(0).is_none());
    }
}
