//! Coefficients of `(1 - z)^(-lambda)` and supporting log-gamma differences.

use statrs::function::factorial;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// Arguments at or below this use the iterated product for `d_lambda`.
const PRODUCT_CUTOFF: u64 = 64;

/// `ln C(n, k)`, `-inf` outside `0 <= k <= n`.
pub fn ln_binomial(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return f64::NEG_INFINITY;
    }
    factorial::ln_binomial(n, k as u64)
}

/// `ln Gamma(z + a) - ln Gamma(z)` for `z >= 64` and `z + a >= 64`.
///
/// Differences of the Stirling series, so the result keeps full relative
/// precision even when both log-gammas are of order `z ln z`.
pub(crate) fn ln_gamma_shift(z: f64, a: f64) -> f64 {
    debug_assert!(z >= 64.0 && z + a >= 64.0);
    let w1 = z + a;
    let w0 = z;
    let main = (w1 - 0.5) * (a / w0).ln_1p() + a * w0.ln() - a;
    main + stirling_tail(w1) - stirling_tail(w0)
}

fn stirling_tail(w: f64) -> f64 {
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0
        + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 / 1188.0))))
}

/// `ln d_lambda(x)` with `d_lambda(x) = Gamma(x + lambda) / (Gamma(x + 1) Gamma(lambda))`.
pub fn ln_d_lambda(lambda: f64, x: u64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if x <= PRODUCT_CUTOFF {
        let mut acc = 0.0;
        for k in 1..=x {
            let k = k as f64;
            acc += ((k - 1.0 + lambda) / k).ln();
        }
        return Ok(acc);
    }
    let z = x as f64 + 1.0;
    Ok(ln_gamma_shift(z, lambda - 1.0) - ln_gamma(lambda))
}

/// The `z^x` coefficient of `(1 - z)^(-lambda)`.
pub fn d_lambda(lambda: f64, x: u64) -> Result<f64> {
    ln_d_lambda(lambda, x).map(f64::exp)
}

/// `ln d_lambda(y)` for `y = 0..=x_max`.
pub(crate) fn ln_d_lambda_table(lambda: f64, x_max: u64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let mut out = Vec::with_capacity(x_max as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for y in 1..=x_max {
        if y <= PRODUCT_CUTOFF {
            let k = y as f64;
            acc += ((k - 1.0 + lambda) / k).ln();
            out.push(acc);
        } else {
            out.push(ln_d_lambda(lambda, y)?);
        }
    }
    Ok(out)
}
