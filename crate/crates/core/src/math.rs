//! Numerically stable helpers shared across the crate.
//!
//! All transcendentals go through `libm` so the crate stays `no_std` and
//! produces identical results on every platform.

/// Euler-Mascheroni constant, the mean of a standard Gumbel.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Variance of a standard Gumbel, pi^2 / 6.
pub const GUMBEL_VARIANCE: f64 = core::f64::consts::PI * core::f64::consts::PI / 6.0;

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// log(-log u); the standard Gumbel quantile is `-ln_neg_ln(u)`.
#[inline]
pub(crate) fn ln_neg_ln(u: f64) -> f64 {
    ln(-ln(u))
}

/// log(exp(a) + exp(b)) without overflow; tolerates -inf arguments.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    a.max(b) + ln_1p(exp(-(a - b).abs()))
}

/// log(1 - exp(x)) for x <= 0; returns -inf at x = 0.
pub(crate) fn log1m_exp(x: f64) -> f64 {
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    debug_assert!(x < 0.0, "log1m_exp requires x <= 0, got {x}");
    if x > -core::f64::consts::LN_2 {
        ln(-exp_m1(x))
    } else {
        ln_1p(-exp(x))
    }
}

/// log(1 + exp(x)), saturating correctly at both tails.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 36.0 {
        x
    } else if x < -37.0 {
        exp(x)
    } else {
        ln_1p(exp(x))
    }
}

/// log(sum exp(x_i)) with max subtraction; -inf for empty or all -inf input.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().fold(f64::NEG_INFINITY, |acc, &x| acc.max(x));
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| exp(x - m)).sum();
    m + ln(sum)
}
