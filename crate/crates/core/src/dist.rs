//! Closed-form densities, CDFs, quantiles and moments for the Gumbel,
//! truncated Gumbel, Exponential and categorical (Boltzmann) families.

use alloc::vec::Vec;

use crate::math;

/// Parameter validation failure for a distribution operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistError {
    /// A density or quantile was requested at scale beta = 0.
    DegenerateScale,
    /// A uniform argument fell outside its required open interval.
    UniformOutOfRange,
    NonPositiveRate,
    InvalidParameter(&'static str),
}

impl core::fmt::Display for DistError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::DegenerateScale => write!(f, "scale beta = 0 has no density or quantile"),
            Self::UniformOutOfRange => write!(f, "uniform argument outside its valid interval"),
            Self::NonPositiveRate => write!(f, "rate must be positive and finite"),
            Self::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for DistError {}

/// Location/scale parameters of a Gumbel distribution.
///
/// `beta = 0` is accepted and denotes the point mass at `mu`; it supports
/// moments only.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GumbelParams {
    mu: f64,
    beta: f64,
}

impl GumbelParams {
    pub fn new(mu: f64, beta: f64) -> Result<Self, DistError> {
        if !mu.is_finite() {
            return Err(DistError::InvalidParameter("location mu must be finite"));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(DistError::InvalidParameter(
                "scale beta must be finite and nonnegative",
            ));
        }
        Ok(Self { mu, beta })
    }

    /// Gumbel(0, 1).
    pub fn standard() -> Self {
        Self { mu: 0.0, beta: 1.0 }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Density (1/beta) exp(-z - exp(-z)) with z = (x - mu)/beta.
    pub fn pdf(&self, x: f64) -> Result<f64, DistError> {
        if self.beta == 0.0 {
            return Err(DistError::DegenerateScale);
        }
        let z = (x - self.mu) / self.beta;
        Ok(math::exp(-z - math::exp(-z)) / self.beta)
    }

    /// exp(-exp(-(x - mu)/beta)).
    pub fn cdf(&self, x: f64) -> Result<f64, DistError> {
        if self.beta == 0.0 {
            return Err(DistError::DegenerateScale);
        }
        let z = (x - self.mu) / self.beta;
        Ok(math::exp(-math::exp(-z)))
    }

    /// Quantile -beta log(-log u) + mu for u in the open interval (0, 1).
    pub fn icdf(&self, u: f64) -> Result<f64, DistError> {
        if self.beta == 0.0 {
            return Err(DistError::DegenerateScale);
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(DistError::UniformOutOfRange);
        }
        Ok(self.mu - self.beta * math::ln_neg_ln(u))
    }

    /// (mean, variance) = (mu + gamma beta, pi^2/6 beta^2); defined for all
    /// beta >= 0.
    pub fn moments(&self) -> (f64, f64) {
        (
            self.mu + math::EULER_GAMMA * self.beta,
            math::GUMBEL_VARIANCE * self.beta * self.beta,
        )
    }
}

/// Gumbel conditioned to lie at or below an upper bound.
///
/// `bound = +inf` degrades to the untruncated distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TruncGumbelParams {
    mu: f64,
    beta: f64,
    bound: f64,
}

impl TruncGumbelParams {
    pub fn new(mu: f64, beta: f64, bound: f64) -> Result<Self, DistError> {
        if !mu.is_finite() {
            return Err(DistError::InvalidParameter("location mu must be finite"));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(DistError::InvalidParameter(
                "scale beta must be finite and positive",
            ));
        }
        if bound.is_nan() || bound == f64::NEG_INFINITY {
            return Err(DistError::InvalidParameter(
                "truncation bound must be finite or +inf",
            ));
        }
        Ok(Self { mu, beta, bound })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Quantile mu - beta log(exp((mu - bound)/beta) - log u) for u in
    /// (0, 1]; u = 1 maps to the bound itself.
    ///
    /// The two positive summands are combined in log space, since
    /// exp((mu - bound)/beta) overflows as soon as the bound sits far below
    /// the location.
    pub fn icdf(&self, u: f64) -> Result<f64, DistError> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(DistError::UniformOutOfRange);
        }
        if u == 1.0 {
            return Ok(self.bound);
        }
        let shift = (self.mu - self.bound) / self.beta; // -inf when unbounded
        let x = self.mu - self.beta * math::log_add_exp(shift, math::ln_neg_ln(u));
        // Rounding of the round trip through shift can land a hair above
        // the bound when it sits far below the location; truncation is a
        // hard guarantee.
        Ok(x.min(self.bound))
    }

    /// exp(-exp(-(min(x, bound) - mu)/beta)) / exp(-exp(-(bound - mu)/beta)).
    pub fn cdf(&self, x: f64) -> f64 {
        if x >= self.bound {
            return 1.0;
        }
        if self.bound == f64::INFINITY {
            let z = (x - self.mu) / self.beta;
            return math::exp(-math::exp(-z));
        }
        // exp(-exp((mu - bound)/beta) * expm1((bound - x)/beta)): both
        // factors stay representable where the naive ratio overflows.
        let scale = math::exp((self.mu - self.bound) / self.beta);
        math::exp(-scale * math::exp_m1((self.bound - x) / self.beta))
    }
}

/// A categorical distribution held as logits `a` plus a Boltzmann
/// temperature `T`; class probabilities follow the softmax of `a/T`.
///
/// Logits of -inf are first-class and encode unsampleable classes
/// (unnormalized probability zero); at least one logit must be finite.
///
/// Serializes as `{"logits": [..], "temperature": t}`; deserialization
/// revalidates through [`CategoricalParams::new`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawCategoricalParams"))]
pub struct CategoricalParams {
    logits: Vec<f64>,
    temperature: f64,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawCategoricalParams {
    logits: Vec<f64>,
    temperature: f64,
}

#[cfg(feature = "serde")]
impl TryFrom<RawCategoricalParams> for CategoricalParams {
    type Error = DistError;

    fn try_from(raw: RawCategoricalParams) -> Result<Self, DistError> {
        Self::new(raw.logits, raw.temperature)
    }
}

impl CategoricalParams {
    pub fn new(logits: Vec<f64>, temperature: f64) -> Result<Self, DistError> {
        if logits.is_empty() {
            return Err(DistError::InvalidParameter("logits must be nonempty"));
        }
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(DistError::InvalidParameter(
                "temperature must be positive and finite",
            ));
        }
        if logits.iter().any(|a| a.is_nan() || *a == f64::INFINITY) {
            return Err(DistError::InvalidParameter(
                "logits must not be NaN or +inf",
            ));
        }
        if !logits.iter().any(|a| a.is_finite()) {
            return Err(DistError::InvalidParameter(
                "at least one logit must be finite",
            ));
        }
        Ok(Self {
            logits,
            temperature,
        })
    }

    /// Logits derived from probabilities (up to normalization), at T = 1.
    pub fn from_weights(weights: &[f64]) -> Result<Self, DistError> {
        if weights
            .iter()
            .any(|w| w.is_nan() || *w < 0.0 || *w == f64::INFINITY)
        {
            return Err(DistError::InvalidParameter(
                "weights must be finite and nonnegative",
            ));
        }
        let logits = weights.iter().map(|&w| math::ln(w)).collect();
        Self::new(logits, 1.0)
    }

    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// log theta_i = a_i / T.
    #[inline]
    pub fn effective_logit(&self, i: usize) -> f64 {
        self.logits[i] / self.temperature
    }

    pub fn effective_logits(&self) -> Vec<f64> {
        self.logits.iter().map(|a| a / self.temperature).collect()
    }

    /// log Z = logsumexp_i a_i / T.
    pub fn log_partition(&self) -> f64 {
        math::log_sum_exp(&self.effective_logits())
    }

    /// log Z restricted to a sub-domain; -inf if the subset carries no mass.
    pub fn log_partition_over(&self, subset: &[usize]) -> f64 {
        let vals: Vec<f64> = subset.iter().map(|&i| self.effective_logit(i)).collect();
        math::log_sum_exp(&vals)
    }

    /// Normalized probabilities pi_i = exp(a_i/T - log Z); -inf logits map
    /// to exactly 0.
    pub fn probs(&self) -> Vec<f64> {
        let eff = self.effective_logits();
        let lse = math::log_sum_exp(&eff);
        eff.iter().map(|&s| math::exp(s - lse)).collect()
    }

    /// Probabilities renormalized over `subset`, in subset order.
    pub fn probs_over(&self, subset: &[usize]) -> Vec<f64> {
        let lse = self.log_partition_over(subset);
        subset
            .iter()
            .map(|&i| math::exp(self.effective_logit(i) - lse))
            .collect()
    }

    /// A copy with class `i` made unsampleable (logit -inf).
    pub fn with_masked(&self, i: usize) -> Result<Self, DistError> {
        if i >= self.logits.len() {
            return Err(DistError::InvalidParameter("masked index out of bounds"));
        }
        let mut logits = self.logits.clone();
        logits[i] = f64::NEG_INFINITY;
        Self::new(logits, self.temperature)
    }
}

/// Exponential quantile -log(1 - u)/rate for u in (0, 1).
pub fn exponential_icdf(u: f64, rate: f64) -> Result<f64, DistError> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(DistError::NonPositiveRate);
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(DistError::UniformOutOfRange);
    }
    Ok(-math::ln_1p(-u) / rate)
}

/// A categorical base distribution paired with a Gumbel-Softmax relaxation
/// temperature lambda.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GumbelSoftmaxParams {
    base: CategoricalParams,
    lambda: f64,
}

impl GumbelSoftmaxParams {
    pub fn new(base: CategoricalParams, lambda: f64) -> Result<Self, DistError> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(DistError::InvalidParameter(
                "lambda must be positive and finite",
            ));
        }
        Ok(Self { base, lambda })
    }

    pub fn base(&self) -> &CategoricalParams {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{EULER_GAMMA, GUMBEL_VARIANCE};
    use alloc::vec;

    const E_INV: f64 = 0.367_879_441_171_442_33;

    #[test]
    fn pdf_at_location_is_inverse_e() {
        let g = GumbelParams::standard();
        assert!((g.pdf(0.0).unwrap() - E_INV).abs() < 1e-15);
    }

    #[test]
    fn pdf_vanishes_in_the_upper_tail() {
        let g = GumbelParams::new(1.0, 2.0).unwrap();
        assert!(g.pdf(1.0 + 2.0 * 1000.0).unwrap() < 1e-300);
    }

    #[test]
    fn pdf_integrates_to_one() {
        // Trapezoid quadrature over [mu - 20 beta, mu + 40 beta].
        let g = GumbelParams::new(0.5, 1.5).unwrap();
        let (lo, hi) = (0.5 - 20.0 * 1.5, 0.5 + 40.0 * 1.5);
        let steps = 600_000usize;
        let h = (hi - lo) / steps as f64;
        let mut acc = 0.5 * (g.pdf(lo).unwrap() + g.pdf(hi).unwrap());
        for k in 1..steps {
            acc += g.pdf(lo + h * k as f64).unwrap();
        }
        let integral = acc * h;
        assert!((integral - 1.0).abs() < 1e-6, "integral = {integral}");
    }

    #[test]
    fn pdf_rejects_degenerate_scale() {
        let g = GumbelParams::new(0.0, 0.0).unwrap();
        assert_eq!(g.pdf(0.0), Err(DistError::DegenerateScale));
        assert_eq!(g.cdf(0.0), Err(DistError::DegenerateScale));
        assert_eq!(g.icdf(0.5), Err(DistError::DegenerateScale));
    }

    #[test]
    fn cdf_known_values() {
        let g = GumbelParams::standard();
        assert!((g.cdf(0.0).unwrap() - E_INV).abs() < 1e-15);
        let expect = math::exp(-math::exp(-2.0)); // ~0.8734
        let shifted = GumbelParams::new(1.0, 3.0).unwrap();
        assert!((shifted.cdf(1.0 + 3.0 * 2.0).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn cdf_is_monotone() {
        let g = GumbelParams::new(-1.0, 0.7).unwrap();
        let mut prev = 0.0;
        for k in -60..60 {
            let c = g.cdf(k as f64 * 0.25).unwrap();
            assert!((0.0..=1.0).contains(&c));
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn icdf_known_values() {
        let g = GumbelParams::standard();
        assert!(g.icdf(E_INV).unwrap().abs() < 1e-15);
        assert!((g.icdf(math::exp(-math::exp(-2.0))).unwrap() - 2.0).abs() < 1e-12);
        let med = g.icdf(0.5).unwrap();
        assert!((med - 0.366_512_920_581_664_35).abs() < 1e-12);
        assert!((g.cdf(med).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn icdf_round_trip() {
        let g = GumbelParams::new(2.0, 0.5).unwrap();
        for u in [0.01, 0.5, 0.99] {
            assert!((g.cdf(g.icdf(u).unwrap()).unwrap() - u).abs() < 1e-10);
        }
    }

    #[test]
    fn icdf_rejects_closed_endpoints() {
        let g = GumbelParams::standard();
        assert_eq!(g.icdf(0.0), Err(DistError::UniformOutOfRange));
        assert_eq!(g.icdf(1.0), Err(DistError::UniformOutOfRange));
    }

    #[test]
    fn moments_match_closed_form() {
        let (m, v) = GumbelParams::standard().moments();
        assert!((m - EULER_GAMMA).abs() < 1e-12);
        assert!((v - GUMBEL_VARIANCE).abs() < 1e-12);

        let (m, v) = GumbelParams::new(2.0, 3.0).unwrap().moments();
        assert!((m - (2.0 + 3.0 * EULER_GAMMA)).abs() < 1e-12);
        assert!((v - 9.0 * GUMBEL_VARIANCE).abs() < 1e-12);

        assert_eq!(GumbelParams::new(5.0, 0.0).unwrap().moments(), (5.0, 0.0));
    }

    #[test]
    fn trunc_icdf_hits_bound_at_one() {
        let t = TruncGumbelParams::new(0.3, 2.0, -1.25).unwrap();
        assert_eq!(t.icdf(1.0).unwrap(), -1.25);
    }

    #[test]
    fn trunc_icdf_unbounded_reduces_to_gumbel() {
        let t = TruncGumbelParams::new(0.7, 1.3, f64::INFINITY).unwrap();
        let g = GumbelParams::new(0.7, 1.3).unwrap();
        for u in [0.05, 0.4, 0.95] {
            assert_eq!(t.icdf(u).unwrap(), g.icdf(u).unwrap());
        }
    }

    #[test]
    fn trunc_icdf_median_at_zero_bound() {
        let t = TruncGumbelParams::new(0.0, 1.0, 0.0).unwrap();
        let expect = -math::ln(1.0 + math::ln(2.0)); // ~-0.52662
        assert!((t.icdf(0.5).unwrap() - expect).abs() < 1e-12);
        assert!((t.cdf(t.icdf(0.5).unwrap()) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn trunc_icdf_rejects_zero() {
        let t = TruncGumbelParams::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(t.icdf(0.0), Err(DistError::UniformOutOfRange));
    }

    #[test]
    fn trunc_icdf_survives_bound_far_below_location() {
        // exp((mu - bound)/beta) alone would overflow here.
        let t = TruncGumbelParams::new(0.0, 1.0, -1000.0).unwrap();
        let x = t.icdf(0.5).unwrap();
        assert!(x.is_finite() && x <= -1000.0);
    }

    #[test]
    fn trunc_cdf_saturates_at_bound() {
        let t = TruncGumbelParams::new(0.0, 1.0, 1.5).unwrap();
        assert_eq!(t.cdf(1.5), 1.0);
        assert_eq!(t.cdf(10.0), 1.0);
    }

    #[test]
    fn trunc_cdf_unbounded_equals_gumbel_cdf() {
        let t = TruncGumbelParams::new(0.2, 0.9, f64::INFINITY).unwrap();
        let g = GumbelParams::new(0.2, 0.9).unwrap();
        for x in [-3.0, 0.0, 4.0] {
            assert!((t.cdf(x) - g.cdf(x).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn trunc_round_trip() {
        let t = TruncGumbelParams::new(-0.4, 1.7, 0.9).unwrap();
        for u in [0.1, 0.9] {
            assert!((t.cdf(t.icdf(u).unwrap()) - u).abs() < 1e-10);
        }
    }

    #[test]
    fn categorical_uniform_logits() {
        let c = CategoricalParams::new(vec![0.0, 0.0, 0.0], 3.7).unwrap();
        for p in c.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn categorical_eight_two() {
        let c = CategoricalParams::new(vec![math::ln(8.0), math::ln(2.0)], 1.0).unwrap();
        let p = c.probs();
        assert!((p[0] - 0.8).abs() < 1e-12);
        assert!((p[1] - 0.2).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn categorical_high_temperature_flattens() {
        // sigmoid(5/T) = 1/2 + 1.25/T + O(T^-3)
        let c = CategoricalParams::new(vec![5.0, 0.0], 1e6).unwrap();
        let p = c.probs();
        assert!((p[0] - 0.5).abs() < 1.5e-6);
        assert!((p[1] - 0.5).abs() < 1.5e-6);
        let colder = CategoricalParams::new(vec![5.0, 0.0], 1e8).unwrap();
        assert!((colder.probs()[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn categorical_neg_inf_logit_gets_zero_mass() {
        let c = CategoricalParams::new(vec![0.0, f64::NEG_INFINITY], 1.0).unwrap();
        let p = c.probs();
        assert_eq!(p[1], 0.0);
        assert!((p[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn categorical_rejects_bad_input() {
        assert!(CategoricalParams::new(vec![], 1.0).is_err());
        assert!(CategoricalParams::new(vec![0.0], 0.0).is_err());
        assert!(CategoricalParams::new(vec![0.0], -1.0).is_err());
        assert!(CategoricalParams::new(vec![f64::NEG_INFINITY], 1.0).is_err());
        assert!(CategoricalParams::new(vec![f64::NAN], 1.0).is_err());
    }

    #[test]
    fn masking_keeps_remaining_mass() {
        let c = CategoricalParams::from_weights(&[0.5, 0.3, 0.2]).unwrap();
        let masked = c.with_masked(0).unwrap();
        let p = masked.probs();
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 0.6).abs() < 1e-12);
        assert!((p[2] - 0.4).abs() < 1e-12);
        assert!(masked.with_masked(1).unwrap().with_masked(2).is_err());
    }

    #[test]
    fn exponential_known_value() {
        let u = 1.0 - E_INV;
        assert!((exponential_icdf(u, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(exponential_icdf(0.5, 0.0), Err(DistError::NonPositiveRate));
        assert_eq!(
            exponential_icdf(1.0, 1.0),
            Err(DistError::UniformOutOfRange)
        );
    }

    #[test]
    fn gumbel_softmax_params_validate_lambda() {
        let base = CategoricalParams::new(vec![0.0, 1.0], 1.0).unwrap();
        assert!(GumbelSoftmaxParams::new(base.clone(), 0.5).is_ok());
        assert!(GumbelSoftmaxParams::new(base.clone(), 0.0).is_err());
        assert!(GumbelSoftmaxParams::new(base, -2.0).is_err());
    }
}
