//! Coefficients `c_lambda(r, x)` of `C_lambda(r, z) = (1 - 4 r z (1 + z))^(-lambda)`.
//!
//! The polynomial factors as `(1 - z/gamma)(1 + z/(gamma + 1))`, so
//!
//! ```text
//! c_lambda(r, x) = d(x) gamma^(-x) sum_{y=0}^{x} (-rho)^y d(y) d(x - y) / d(x)
//! ```
//!
//! with `d = d_lambda` and `rho = gamma / (gamma + 1) < 1`. The prefactor is
//! kept in log space; the inner alternating sum starts at `1` (the `y = 0`
//! term) and decays geometrically, so it is accumulated in ordinary floating
//! point.

use serde::Serialize;

use super::logreal::LogReal;
use super::scalars::gamma_of_r;
use super::special::ln_d_lambda_table;
use crate::error::{invalid, Error, Result};

/// `c_lambda(r, x)` for `x = 0..=x_max`.
#[derive(Debug, Clone, Serialize)]
pub struct CoefTable {
    pub lambda: f64,
    pub r: f64,
    pub coeffs: Vec<LogReal>,
}

impl CoefTable {
    pub fn x_max(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    /// Coefficient at `x`, zero for negative `x`.
    pub fn get(&self, x: i64) -> LogReal {
        if x < 0 {
            return LogReal::ZERO;
        }
        self.coeffs[x as usize]
    }
}

fn check(lambda: f64, r: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("r must be positive and finite, got {r}")));
    }
    Ok(())
}

fn inner_sum(ln_d: &[f64], x: usize, ratio: f64) -> f64 {
    let ln_dx = ln_d[x];
    let mut sum = 0.0;
    let mut sign_pow = 1.0;
    for y in 0..=x {
        sum += sign_pow * (ln_d[y] + ln_d[x - y] - ln_dx).exp();
        sign_pow *= -ratio;
        if sign_pow == 0.0 {
            break;
        }
    }
    sum
}

fn assemble(ln_d: &[f64], x: usize, ln_gamma: f64, ratio: f64) -> Result<LogReal> {
    let s = inner_sum(ln_d, x, ratio);
    if !(s > 0.0) {
        return Err(Error::NumericalOverflow(format!(
            "alternating sum lost positivity at x = {x} (value {s:e})"
        )));
    }
    Ok(LogReal::from_ln(ln_d[x] - x as f64 * ln_gamma + s.ln()))
}

/// Table of `c_lambda(r, x)` for `x = 0..=x_max`.
pub fn c_lambda_table(lambda: f64, r: f64, x_max: u64) -> Result<CoefTable> {
    check(lambda, r)?;
    let gamma = gamma_of_r(r)?;
    let ratio = gamma / (gamma + 1.0);
    let ln_d = ln_d_lambda_table(lambda, x_max)?;
    let ln_gamma = gamma.ln();
    let coeffs = (0..=x_max as usize)
        .map(|x| assemble(&ln_d, x, ln_gamma, ratio))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefTable { lambda, r, coeffs })
}

/// A single coefficient `c_lambda(r, x)`, in `O(x)`.
pub fn c_lambda(lambda: f64, r: f64, x: u64) -> Result<LogReal> {
    check(lambda, r)?;
    let gamma = gamma_of_r(r)?;
    let ratio = gamma / (gamma + 1.0);
    let ln_d = ln_d_lambda_table(lambda, x)?;
    assemble(&ln_d, x as usize, gamma.ln(), ratio)
}
