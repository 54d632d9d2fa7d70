//! Gradient estimators for d E[f(X)] / d phi on a categorical X:
//! score-function (REINFORCE), pathwise Gumbel-Softmax, and its
//! straight-through variant, each reported against the analytic gradient.
//!
//! Gradients are taken with respect to the effective logits log theta =
//! a/T, so every closed form below holds verbatim at any temperature.
//! Jacobians are hand-derived rather than autodiffed; the closed forms are
//! what make exact finite-difference validation possible.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::{CategoricalParams, GumbelSoftmaxParams};
use crate::math;
use crate::relax::{gs_sample_with_noise, st_gs_sample_with_noise};
use crate::rng::RngState;
use crate::sampling::inverse_transform_sample;

/// Payoff shape on the simplex. Only forms defined and differentiable on
/// the simplex interior qualify for the pathwise estimators; linear and
/// quadratic suffice to separate GS from ST-GS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum PayoffForm {
    /// f(s) = sum_i c_i s_i
    Linear,
    /// f(s) = sum_i c_i s_i^2
    Quadratic,
}

/// A payoff vector c plus the form it enters through. On one-hot vectors
/// both forms give f = c_omega.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Objective {
    payoff: Vec<f64>,
    form: PayoffForm,
    description: String,
}

impl Objective {
    pub fn linear(payoff: Vec<f64>) -> Self {
        assert!(
            payoff.iter().all(|c| c.is_finite()),
            "payoff must be finite"
        );
        Self {
            payoff,
            form: PayoffForm::Linear,
            description: String::from("linear"),
        }
    }

    pub fn quadratic(payoff: Vec<f64>) -> Self {
        assert!(
            payoff.iter().all(|c| c.is_finite()),
            "payoff must be finite"
        );
        Self {
            payoff,
            form: PayoffForm::Quadratic,
            description: String::from("quadratic"),
        }
    }

    pub fn payoff(&self) -> &[f64] {
        &self.payoff
    }

    pub fn form(&self) -> PayoffForm {
        self.form
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn len(&self) -> usize {
        self.payoff.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payoff.is_empty()
    }

    /// f evaluated anywhere on the simplex.
    pub fn value(&self, s: &[f64]) -> f64 {
        match self.form {
            PayoffForm::Linear => self.payoff.iter().zip(s).map(|(c, x)| c * x).sum(),
            PayoffForm::Quadratic => self.payoff.iter().zip(s).map(|(c, x)| c * x * x).sum(),
        }
    }

    /// f at the one-hot vector of class i; c_i for both forms.
    pub fn value_at_index(&self, i: usize) -> f64 {
        self.payoff[i]
    }

    /// df/ds.
    pub fn grad(&self, s: &[f64]) -> Vec<f64> {
        match self.form {
            PayoffForm::Linear => self.payoff.clone(),
            PayoffForm::Quadratic => self
                .payoff
                .iter()
                .zip(s)
                .map(|(c, x)| 2.0 * c * x)
                .collect(),
        }
    }
}

/// Monte Carlo gradient estimate with its standard errors and the analytic
/// reference it is judged against.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EstimatorReport {
    pub grad_mean: Vec<f64>,
    pub grad_std_err: Vec<f64>,
    pub n_samples: usize,
    pub oracle_grad: Vec<f64>,
    pub max_abs_bias: f64,
}

/// Exact gradient of E[f(one-hot)] with respect to the effective logits:
/// d/d a_j sum_i pi_i c_i = pi_j (c_j - sum_i pi_i c_i).
pub fn analytic_grad(c: &CategoricalParams, obj: &Objective) -> Vec<f64> {
    let probs = c.probs();
    let expectation: f64 = probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * obj.value_at_index(i))
        .sum();
    probs
        .iter()
        .enumerate()
        .map(|(j, p)| p * (obj.value_at_index(j) - expectation))
        .collect()
}

struct RunningMoments {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningMoments {
    fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: alloc::vec![0.0; dim],
            m2: alloc::vec![0.0; dim],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.n += 1;
        let nf = self.n as f64;
        for (j, &x) in sample.iter().enumerate() {
            let delta = x - self.mean[j];
            self.mean[j] += delta / nf;
            self.m2[j] += delta * (x - self.mean[j]);
        }
    }

    fn std_err(&self) -> Vec<f64> {
        let nf = self.n as f64;
        self.m2
            .iter()
            .map(|&m2| {
                if self.n > 1 {
                    math::sqrt(m2 / (nf - 1.0) / nf)
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn into_report(self, oracle: Vec<f64>) -> EstimatorReport {
        let std_err = self.std_err();
        let max_abs_bias = self
            .mean
            .iter()
            .zip(&oracle)
            .map(|(m, o)| (m - o).abs())
            .fold(0.0f64, f64::max);
        EstimatorReport {
            grad_mean: self.mean,
            grad_std_err: std_err,
            n_samples: self.n,
            oracle_grad: oracle,
            max_abs_bias,
        }
    }
}

/// Score-function estimator: f(X) d log p(X) / d a_j with
/// d log pi_omega / d a_j = 1{j = omega} - pi_j. Unbiased.
pub fn reinforce_grad(
    c: &CategoricalParams,
    obj: &Objective,
    n_samples: usize,
    mut rng: RngState,
) -> (EstimatorReport, RngState) {
    assert!(n_samples >= 1);
    let probs = c.probs();
    let mut acc = RunningMoments::new(c.len());
    let mut grad = alloc::vec![0.0; c.len()];
    for _ in 0..n_samples {
        let (omega, next) = inverse_transform_sample(c, rng);
        rng = next;
        let f = obj.value_at_index(omega);
        for (j, g) in grad.iter_mut().enumerate() {
            let indicator = if j == omega { 1.0 } else { 0.0 };
            *g = f * (indicator - probs[j]);
        }
        acc.push(&grad);
    }
    (acc.into_report(analytic_grad(c, obj)), rng)
}

/// Pathwise gradient of one relaxed draw, from frozen noise: the softmax
/// Jacobian dS_i/da_j = S_i (1{i=j} - S_j)/lambda contracted against
/// df/dS.
pub fn gs_pathwise_grad_with_noise(
    p: &GumbelSoftmaxParams,
    obj: &Objective,
    noise: &[f64],
) -> Vec<f64> {
    let s = gs_sample_with_noise(p, noise);
    pathwise_from_sensitivity(s.weights(), &obj.grad(s.weights()), p.lambda())
}

/// Straight-through variant: df/dS is evaluated at the hard one-hot vector
/// while the Jacobian stays that of the soft sample.
pub fn st_gs_pathwise_grad_with_noise(
    p: &GumbelSoftmaxParams,
    obj: &Objective,
    noise: &[f64],
) -> Vec<f64> {
    let pair = st_gs_sample_with_noise(p, noise);
    pathwise_from_sensitivity(pair.soft().weights(), &obj.grad(pair.hard()), p.lambda())
}

fn pathwise_from_sensitivity(weights: &[f64], df: &[f64], lambda: f64) -> Vec<f64> {
    let inner: f64 = df.iter().zip(weights).map(|(d, w)| d * w).sum();
    weights
        .iter()
        .zip(df)
        .map(|(&w, &d)| w * (d - inner) / lambda)
        .collect()
}

/// Monte Carlo Gumbel-Softmax estimator. Unbiased for the relaxed objective
/// E[f(S_lambda)]; biased for the discrete one, which is what
/// `max_abs_bias` quantifies.
pub fn gs_grad(
    p: &GumbelSoftmaxParams,
    obj: &Objective,
    n_samples: usize,
    rng: RngState,
) -> (EstimatorReport, RngState) {
    run_pathwise(p, obj, n_samples, rng, gs_pathwise_grad_with_noise)
}

/// Monte Carlo straight-through Gumbel-Softmax estimator.
pub fn st_gs_grad(
    p: &GumbelSoftmaxParams,
    obj: &Objective,
    n_samples: usize,
    rng: RngState,
) -> (EstimatorReport, RngState) {
    run_pathwise(p, obj, n_samples, rng, st_gs_pathwise_grad_with_noise)
}

fn run_pathwise(
    p: &GumbelSoftmaxParams,
    obj: &Objective,
    n_samples: usize,
    mut rng: RngState,
    per_sample: fn(&GumbelSoftmaxParams, &Objective, &[f64]) -> Vec<f64>,
) -> (EstimatorReport, RngState) {
    assert!(n_samples >= 1);
    let n = p.base().len();
    let mut acc = RunningMoments::new(n);
    let mut noise = alloc::vec![0.0; n];
    for _ in 0..n_samples {
        for g in noise.iter_mut() {
            let (u, next) = rng.next_uniform();
            rng = next;
            *g = -math::ln_neg_ln(u);
        }
        acc.push(&per_sample(p, obj, &noise));
    }
    (acc.into_report(analytic_grad(p.base(), obj)), rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum EstimatorKind {
    Reinforce,
    GumbelSoftmax,
    StraightThroughGs,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Reinforce => "reinforce",
            Self::GumbelSoftmax => "gs",
            Self::StraightThroughGs => "stgs",
        }
    }
}

/// One row of the bias/variance sweep: statistics of `n_reps` independent
/// estimates, each averaging `n_samples` draws.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VarianceRow {
    pub estimator: EstimatorKind,
    pub lambda: Option<f64>,
    pub grad_mean: Vec<f64>,
    /// Per-coordinate variance of the per-rep estimates.
    pub grad_variance: Vec<f64>,
    pub max_abs_bias: f64,
    /// Sum of the per-coordinate variances.
    pub total_variance: f64,
    pub n_samples: usize,
    pub n_reps: usize,
}

/// Bias/variance table: one REINFORCE row, then one GS row per lambda.
/// Deterministic given the incoming stream.
pub fn variance_report(
    c: &CategoricalParams,
    obj: &Objective,
    lambdas: &[f64],
    n_samples: usize,
    n_reps: usize,
    mut rng: RngState,
) -> (Vec<VarianceRow>, RngState) {
    assert!(n_reps >= 2, "variance needs at least two repetitions");
    let oracle = analytic_grad(c, obj);
    let mut rows = Vec::with_capacity(1 + lambdas.len());

    let mut acc = RunningMoments::new(c.len());
    for _ in 0..n_reps {
        let (report, next) = reinforce_grad(c, obj, n_samples, rng);
        rng = next;
        acc.push(&report.grad_mean);
    }
    rows.push(finish_row(
        EstimatorKind::Reinforce,
        None,
        acc,
        &oracle,
        n_samples,
        n_reps,
    ));

    for &lambda in lambdas {
        let p = GumbelSoftmaxParams::new(c.clone(), lambda).expect("lambda validated by caller");
        let mut acc = RunningMoments::new(c.len());
        for _ in 0..n_reps {
            let (report, next) = gs_grad(&p, obj, n_samples, rng);
            rng = next;
            acc.push(&report.grad_mean);
        }
        rows.push(finish_row(
            EstimatorKind::GumbelSoftmax,
            Some(lambda),
            acc,
            &oracle,
            n_samples,
            n_reps,
        ));
    }
    (rows, rng)
}

fn finish_row(
    estimator: EstimatorKind,
    lambda: Option<f64>,
    acc: RunningMoments,
    oracle: &[f64],
    n_samples: usize,
    n_reps: usize,
) -> VarianceRow {
    let nf = acc.n as f64;
    let variance: Vec<f64> = acc.m2.iter().map(|&m2| m2 / (nf - 1.0)).collect();
    let max_abs_bias = acc
        .mean
        .iter()
        .zip(oracle)
        .map(|(m, o)| (m - o).abs())
        .fold(0.0f64, f64::max);
    let total_variance = variance.iter().sum();
    VarianceRow {
        estimator,
        lambda,
        grad_mean: acc.mean,
        grad_variance: variance,
        max_abs_bias,
        total_variance,
        n_samples,
        n_reps,
    }
}
