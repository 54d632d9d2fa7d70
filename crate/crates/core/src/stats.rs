//! Goodness-of-fit, two-sample and moment checks backing the crate's
//! distributional claims.
//!
//! p-values come from in-house series/continued-fraction evaluations of the
//! regularized incomplete gamma function (chi-square) and the Kolmogorov
//! distribution (KS), accurate well beyond 1e-8. The default significance
//! level is deliberately low because many tests run per suite.

use alloc::vec::Vec;

use crate::math;

/// Significance level used throughout the verification suites.
pub const DEFAULT_ALPHA: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsError {
    EmptySample,
    LengthMismatch,
    AllZeroExpected,
    /// Bin merging left fewer than two effective bins.
    InsufficientBins,
}

impl core::fmt::Display for StatsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::EmptySample => write!(f, "sample must be nonempty"),
            Self::LengthMismatch => write!(f, "input lengths differ"),
            Self::AllZeroExpected => write!(f, "expected probabilities are all zero"),
            Self::InsufficientBins => write!(f, "fewer than two effective bins after merging"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Outcome of a goodness-of-fit or two-sample test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GofResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    pub alpha: f64,
    pub pass: bool,
}

impl GofResult {
    fn new(statistic: f64, p_value: f64, dof: usize, alpha: f64) -> Self {
        Self {
            statistic,
            p_value,
            dof,
            alpha,
            pass: p_value > alpha,
        }
    }
}

/// Pearson chi-square test of observed counts against expected bin
/// probabilities.
///
/// Bins whose expected count falls below 5 are merged into their left
/// neighbor block, the standard validity requirement for the asymptotic
/// null distribution. Zero-probability bins must hold zero counts;
/// otherwise the test rejects outright.
pub fn chi_square_gof(
    counts: &[u64],
    expected_probs: &[f64],
    alpha: f64,
) -> Result<GofResult, StatsError> {
    if counts.len() != expected_probs.len() {
        return Err(StatsError::LengthMismatch);
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(StatsError::EmptySample);
    }
    let total_p: f64 = expected_probs.iter().sum();
    if total_p.is_nan() || total_p <= 0.0 {
        return Err(StatsError::AllZeroExpected);
    }

    let mut observed = Vec::new();
    let mut expected = Vec::new();
    for (&c, &p) in counts.iter().zip(expected_probs) {
        if p > 0.0 {
            observed.push(c as f64);
            expected.push(p / total_p * n as f64);
        } else if c > 0 {
            // Mass observed where none was expected: certain rejection.
            return Ok(GofResult::new(f64::INFINITY, 0.0, counts.len() - 1, alpha));
        }
    }

    let (observed, expected) = merge_small_bins(&observed, &expected);
    if observed.len() < 2 {
        return Err(StatsError::InsufficientBins);
    }

    let statistic: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let dof = observed.len() - 1;
    Ok(GofResult::new(
        statistic,
        chi_square_sf(statistic, dof as f64),
        dof,
        alpha,
    ))
}

fn merge_small_bins(observed: &[f64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= 5.0 {
            obs.push(acc_o);
            exp.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 {
        if let (Some(last_o), Some(last_e)) = (obs.last_mut(), exp.last_mut()) {
            *last_o += acc_o;
            *last_e += acc_e;
        } else {
            obs.push(acc_o);
            exp.push(acc_e);
        }
    }
    (obs, exp)
}

/// Two-sample chi-square over matched count vectors (equal totals assumed,
/// as produced by running two samplers for the same number of draws).
pub fn chi_square_two_sample(
    counts_a: &[u64],
    counts_b: &[u64],
    alpha: f64,
) -> Result<GofResult, StatsError> {
    if counts_a.len() != counts_b.len() {
        return Err(StatsError::LengthMismatch);
    }
    let na: u64 = counts_a.iter().sum();
    let nb: u64 = counts_b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(StatsError::EmptySample);
    }
    let ra = math::sqrt(nb as f64 / na as f64);
    let rb = math::sqrt(na as f64 / nb as f64);
    let mut statistic = 0.0;
    let mut bins = 0usize;
    for (&a, &b) in counts_a.iter().zip(counts_b) {
        if a + b == 0 {
            continue;
        }
        let d = ra * a as f64 - rb * b as f64;
        statistic += d * d / (a + b) as f64;
        bins += 1;
    }
    if bins < 2 {
        return Err(StatsError::InsufficientBins);
    }
    let dof = bins - 1;
    Ok(GofResult::new(
        statistic,
        chi_square_sf(statistic, dof as f64),
        dof,
        alpha,
    ))
}

/// Kolmogorov-Smirnov test of a sample against a reference CDF.
pub fn ks_one_sample<F>(xs: &[f64], cdf: F, alpha: f64) -> Result<GofResult, StatsError>
where
    F: Fn(f64) -> f64,
{
    if xs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sqrt_n = math::sqrt(n);
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(GofResult::new(d, kolmogorov_sf(lambda), 0, alpha))
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(xs: &[f64], ys: &[f64], alpha: f64) -> Result<GofResult, StatsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let (xa, xb) = (a[i], b[j]);
        if xa <= xb {
            i += 1;
        }
        if xb <= xa {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = math::sqrt(na * nb / (na + nb));
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Ok(GofResult::new(d, kolmogorov_sf(lambda), 0, alpha))
}

/// Check sample mean and variance against expectations, each within
/// `k_sigma` of its own sampling error. The variance error uses the
/// kurtosis-aware formula var(s^2) ~ (m4 - s^4)/n, which matters for
/// heavy-tailed draws like the Gumbel.
pub fn moment_check(xs: &[f64], expected_mean: f64, expected_var: f64, k_sigma: f64) -> bool {
    let n = xs.len();
    if n < 2 {
        return false;
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    let var = m2 / (nf - 1.0);
    m4 /= nf;

    let se_mean = math::sqrt(var / nf);
    let mean_ok =
        (mean - expected_mean).abs() <= k_sigma * se_mean + 1e-12 * (1.0 + expected_mean.abs());

    let se_var = math::sqrt((m4 - var * var).max(0.0) / nf);
    let var_ok =
        (var - expected_var).abs() <= k_sigma * se_var + 1e-12 * (1.0 + expected_var.abs());

    mean_ok && var_ok
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom: Q(dof/2, x/2).
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_upper(dof / 2.0, x / 2.0)
}

/// Survival function of the Kolmogorov distribution,
/// 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let t = 2.0 * math::exp(-2.0 * (j as f64) * (j as f64) * lambda * lambda);
        sum += sign * t;
        if t < 1e-12 {
            break;
        }
        sign = -sign;
    }
    sum.clamp(0.0, 1.0)
}

/// Upper regularized incomplete gamma Q(s, x), via the series for the lower
/// tail and a Lentz continued fraction for the upper.
fn regularized_gamma_upper(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < s + 1.0 {
        1.0 - lower_gamma_series(s, x)
    } else {
        upper_gamma_cf(s, x)
    }
}

fn lower_gamma_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut a = s;
    for _ in 0..500 {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * math::exp(-x + s * math::ln(x) - math::ln_gamma(s))
}

fn upper_gamma_cf(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * math::exp(-x + s * math::ln(x) - math::ln_gamma(s))
}
