//! Jeffreys priors for the Poisson mean of `X_0` and the offspring parameter.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::kernel::{d_lambda, ln_d_lambda};

/// `ln((1 + u)^n - 1)` without overflow for large `n`.
fn ln_growth_minus_one(n: u64, u: f64) -> f64 {
    let a = n as f64 * u.ln_1p();
    if a > 1.0 {
        a + (-(-a).exp()).ln_1p()
    } else {
        a.exp_m1().ln()
    }
}

/// `ln q_n(u)` with `q_n(u) = sqrt(((1 + u)^n - 1) / u)` and `q_n(0) = sqrt(n)`.
pub(crate) fn ln_q_n(n: u64, u: f64) -> f64 {
    if u == 0.0 {
        return 0.5 * (n as f64).ln();
    }
    0.5 * (ln_growth_minus_one(n, u) - u.ln())
}

/// `ln pi_n(u)`; `+inf` at `u = 0` and `u = 1`.
pub fn ln_jeffreys_pi_n(n: u64, u: f64) -> Result<f64> {
    if n < 1 {
        return Err(invalid("pi_n needs n >= 1"));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(invalid(format!("u must lie in [0, 1], got {u}")));
    }
    if u == 0.0 || u == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(ln_q_n(n, u) - 0.5 * u.ln() - 0.5 * (-u).ln_1p())
}

/// Unnormalized Jeffreys density `pi_n(u) = sqrt(((1 + u)^n - 1) / (u^2 (1 - u)))`.
///
/// The endpoints are poles and return `+inf`.
pub fn jeffreys_pi_n(n: u64, u: f64) -> Result<f64> {
    Ok(ln_jeffreys_pi_n(n, u)?.exp())
}

/// Weight of `X_0 = x` once the Poisson mean is integrated out against
/// `d lambda / sqrt(lambda)`, i.e. `2^(-2x) C(2x, x)` up to a constant.
pub fn marginal_x0_weight(x: u64) -> Result<f64> {
    if x < 1 {
        return Err(invalid("x must be at least 1"));
    }
    d_lambda(0.5, x)
}

pub fn ln_marginal_x0_weight(x: u64) -> Result<f64> {
    if x < 1 {
        return Err(invalid("x must be at least 1"));
    }
    ln_d_lambda(0.5, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaPrior {
    /// The improper density `d lambda / sqrt(lambda)`.
    InverseSqrt,
}

/// The product prior on `(Lambda, U)` for a path with `n` observed generations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PriorSpec {
    pub lambda_prior: LambdaPrior,
    pub n: u64,
}

impl PriorSpec {
    pub fn jeffreys(n: u64) -> Result<Self> {
        if n < 1 {
            return Err(invalid("prior needs n >= 1"));
        }
        Ok(PriorSpec {
            lambda_prior: LambdaPrior::InverseSqrt,
            n,
        })
    }

    /// Fisher information of the Poisson mean, `1 / lambda`.
    pub fn lambda_fisher(&self, lambda: f64) -> f64 {
        1.0 / lambda
    }

    pub fn ln_u_density(&self, u: f64) -> Result<f64> {
        ln_jeffreys_pi_n(self.n, u)
    }

    /// Fisher information of `U` after `n` generations when `E(X_0) = mean_x0`,
    /// namely `mean_x0 * pi_n(u)^2`.
    pub fn u_fisher(&self, u: f64, mean_x0: f64) -> Result<f64> {
        Ok(mean_x0 * (2.0 * ln_jeffreys_pi_n(self.n, u)?).exp())
    }
}
