//! The large-horizon posterior `mu(r, x)` of the initial population.
//!
//! `nu(r, x)` puts weight `C(2y, y) C(y, x - y) r^y` on `y = h(x)..=x`, where
//! `h(x)` is the upper half of `x`, and `mu(r, x)` is its normalization.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::dist::DiscreteDist;
use crate::error::{invalid, Error, Result};
use crate::kernel::{c_lambda, exact, ln_binomial, log_sum_exp_ln, r_scalars, rho};

/// Smallest `h` with `2h >= x`.
pub fn upper_half(x: u64) -> Result<u64> {
    if x < 1 {
        return Err(invalid("upper_half needs x >= 1"));
    }
    Ok(x.div_ceil(2))
}

fn check_r(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(invalid(format!("r must lie in [0, +inf], got {r}")));
    }
    Ok(())
}

/// `ln nu(r, x)(y)` for `y = h(x)..=x`; requires `0 < r < inf`.
pub(crate) fn nu_log_weights(r: f64, x: u64) -> Vec<f64> {
    let ln_r = r.ln();
    (x.div_ceil(2)..=x)
        .map(|y| ln_binomial(2 * y, y as i64) + ln_binomial(y, (x - y) as i64) + y as f64 * ln_r)
        .collect()
}

/// `mu(r, x)` in log space. `r = inf` gives the Dirac mass at `x`, `r = 0`
/// the Dirac mass at `h(x)`.
pub fn limit_posterior(r: f64, x: u64) -> Result<DiscreteDist> {
    check_r(r)?;
    let h = upper_half(x)?;
    if r == f64::INFINITY {
        return Ok(DiscreteDist::dirac(x));
    }
    if r == 0.0 {
        return Ok(DiscreteDist::dirac(h));
    }
    DiscreteDist::from_log_weights(h, nu_log_weights(r, x))
}

/// `mu(r, x)` for rational `r >= 0`, with exact probabilities.
pub fn limit_posterior_exact(r: &BigRational, x: u64) -> Result<DiscreteDist> {
    let h = upper_half(x)?;
    if r < &BigRational::zero() {
        return Err(invalid("r must be nonnegative"));
    }
    if r.is_zero() {
        return Ok(DiscreteDist::dirac(h));
    }
    DiscreteDist::from_exact_weights(h, exact::nu_weights(r, x))
}

/// `mu(rho(u), x)`, mapping `u = 0` and `u = 1` to their Dirac limits.
pub fn limit_posterior_u(u: f64, x: u64) -> Result<DiscreteDist> {
    limit_posterior(rho(u)?, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitMoments {
    pub mean: f64,
    pub variance: f64,
    /// `A(r, x) / B(r, x)` from the generating-function coefficients, when
    /// `0 < r < inf`.
    pub mean_from_coefficients: Option<f64>,
}

/// Mean and variance of `mu(r, x)`.
///
/// The mean is computed from the normalized weights and, independently, as
/// `A / B` with `A(r, x) = 2r (c_{3/2}(r, x-1) + c_{3/2}(r, x-2))` and
/// `B(r, x) = c_{1/2}(r, x)`.
pub fn limit_moments(r: f64, x: u64) -> Result<LimitMoments> {
    let dist = limit_posterior(r, x)?;
    let mean_from_coefficients = if r > 0.0 && r.is_finite() {
        Some(coefficient_mean(r, x)?)
    } else {
        None
    };
    Ok(LimitMoments {
        mean: dist.mean(),
        variance: dist.variance(),
        mean_from_coefficients,
    })
}

fn coefficient_mean(r: f64, x: u64) -> Result<f64> {
    let ln_b = c_lambda(0.5, r, x)?.ln();
    let mut terms = vec![c_lambda(1.5, r, x - 1)?.ln()];
    if x >= 2 {
        terms.push(c_lambda(1.5, r, x - 2)?.ln());
    }
    let ln_a = (2.0 * r).ln() + log_sum_exp_ln(&terms);
    Ok((ln_a - ln_b).exp())
}

/// `nu(r, x)(y + 1) / nu(r, x)(y)`.
fn successive_ratio(r: f64, x: u64, y: u64) -> f64 {
    let (xf, yf) = (x as f64, y as f64);
    (yf + 0.5) * (xf - yf) * r / ((yf + 1.0 - xf / 2.0) * (yf + 0.5 - xf / 2.0))
}

/// Smallest maximizer of `nu(r, x)`.
///
/// The successive ratios are nonincreasing in `y`, so the mode is the first
/// `y` where the ratio drops to 1 or below.
pub fn limit_mode(r: f64, x: u64) -> Result<u64> {
    check_r(r)?;
    let mut y = upper_half(x)?;
    if r == 0.0 {
        return Ok(y);
    }
    if r == f64::INFINITY {
        return Ok(x);
    }
    while y < x && successive_ratio(r, x, y) > 1.0 {
        y += 1;
    }
    Ok(y)
}

/// True iff `d1` is stochastically smaller than `d2`, i.e.
/// `P_{d1}(Y >= z) <= P_{d2}(Y >= z)` for every integer `z`.
///
/// Compared exactly when both carry rational probabilities, otherwise with
/// an absolute slack of `1e-12`.
pub fn stochastic_leq(d1: &DiscreteDist, d2: &DiscreteDist) -> bool {
    let lo = d1.support().0.min(d2.support().0);
    let hi = d1.support().1.max(d2.support().1);
    if let (Some(e1), Some(e2)) = (d1.exact_probs(), d2.exact_probs()) {
        let surv = |d: &DiscreteDist, e: &[BigRational], z: u64| -> BigRational {
            let (a, b) = d.support();
            if z <= a {
                return BigRational::one();
            }
            if z > b {
                return BigRational::zero();
            }
            e[(z - a) as usize..]
                .iter()
                .fold(BigRational::zero(), |acc, p| acc + p)
        };
        return (lo..=hi).all(|z| surv(d1, e1, z) <= surv(d2, e2, z));
    }
    (lo..=hi).all(|z| d1.survival(z) <= d2.survival(z) + 1e-12)
}

fn check_open_unit(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("u must lie in (0, 1), got {u}")));
    }
    Ok(())
}

/// `E_u(xi_2) / N_u(2)`: Bayesian over naive prediction of `X_0` given `X_1 = 2`,
/// with `N_u(x) = x / (1 + u)`.
pub fn naive_ratio(u: f64) -> Result<f64> {
    check_open_unit(u)?;
    let v = 1.0 - u;
    Ok((4.0 * u + 6.0 * v * v) * (1.0 + u) / (2.0 * (4.0 * u + 3.0 * v * v)))
}

/// [`naive_ratio`] in rational arithmetic.
pub fn naive_ratio_exact(u: &BigRational) -> Result<BigRational> {
    let one = BigRational::one();
    if u <= &BigRational::zero() || u >= &one {
        return Err(invalid("u must lie in (0, 1)"));
    }
    let n = |k: i64| BigRational::from_integer(k.into());
    let v = &one - u;
    let v2 = &v * &v;
    let num = (n(4) * u + n(6) * &v2) * (&one + u);
    let den = n(2) * (n(4) * u + n(3) * &v2);
    Ok(num / den)
}

/// `F_x(t) = E exp(t (xi_x - m_u x) / sqrt(x))` for `xi_x ~ mu(rho(u), x)`,
/// evaluated as `exp(-t sqrt(x) m) B(r e^{t/sqrt(x)}, x) / B(r, x)`.
pub fn standardized_mgf(u: f64, x: u64, t: f64) -> Result<f64> {
    check_open_unit(u)?;
    if x < 1 {
        return Err(invalid("x must be at least 1"));
    }
    if !(t.abs() <= 3.0) {
        return Err(invalid(format!("t must satisfy |t| <= 3, got {t}")));
    }
    let s = r_scalars(u)?;
    let sqrt_x = (x as f64).sqrt();
    let tilted = s.r * (t / sqrt_x).exp();
    if !tilted.is_finite() || tilted <= 0.0 {
        return Err(Error::NumericalOverflow(format!("tilted r = {tilted}")));
    }
    let ln_f = -t * sqrt_x * s.m + c_lambda(0.5, tilted, x)?.ln() - c_lambda(0.5, s.r, x)?.ln();
    let f = ln_f.exp();
    if !f.is_finite() {
        return Err(Error::NumericalOverflow(format!(
            "F_x(t) overflows: ln F = {ln_f}"
        )));
    }
    Ok(f)
}
