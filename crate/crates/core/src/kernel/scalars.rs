use serde::Serialize;

use crate::error::{invalid, Result};

fn check_unit(u: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&u) {
        return Err(invalid(format!("u must lie in [0, 1], got {u}")));
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(invalid(format!("r must lie in [0, +inf], got {r}")));
    }
    Ok(())
}

/// `rho(u) = (1 - u)^2 / (4u)`, decreasing from `+inf` at `u = 0` to `0` at `u = 1`.
pub fn rho(u: f64) -> Result<f64> {
    check_unit(u)?;
    if u == 0.0 {
        return Ok(f64::INFINITY);
    }
    let v = 1.0 - u;
    Ok(v * v / (4.0 * u))
}

/// Inverse of [`rho`]: `u = (sqrt(1 + r) - sqrt(r))^2`.
pub fn rho_inverse(r: f64) -> Result<f64> {
    check_r(r)?;
    if r == f64::INFINITY {
        return Ok(0.0);
    }
    let s = (1.0 + r).sqrt() + r.sqrt();
    Ok(1.0 / (s * s))
}

/// `gamma(r) = (sqrt((1 + r) / r) - 1) / 2`, the smallest pole modulus of
/// `1 / (1 - 4 r z (1 + z))`.
///
/// Evaluated as `(1/r) / (2 (sqrt(1 + 1/r) + 1))`, which is the same
/// expression without the cancellation at large `r`.
pub fn gamma_of_r(r: f64) -> Result<f64> {
    check_r(r)?;
    if r == 0.0 {
        return Ok(f64::INFINITY);
    }
    if r == f64::INFINITY {
        return Ok(0.0);
    }
    let inv = 1.0 / r;
    Ok(0.5 * inv / ((1.0 + inv).sqrt() + 1.0))
}

/// `m(r) = (1 + sqrt(r / (1 + r))) / 2`.
pub fn m_of_r(r: f64) -> Result<f64> {
    check_r(r)?;
    if r == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(0.5 * (1.0 + (r / (1.0 + r)).sqrt()))
}

/// `sigma^2(r) = sqrt(r / (1 + r)^3) / 4`.
pub fn sigma2_of_r(r: f64) -> Result<f64> {
    check_r(r)?;
    if r == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(0.25 * (r / ((1.0 + r) * (1.0 + r) * (1.0 + r))).sqrt())
}

/// The asymptotic scalars attached to one offspring parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarBundle {
    pub u: f64,
    pub r: f64,
    pub gamma: f64,
    pub gamma2: f64,
    /// Mean rate `1 / (1 + u)`.
    pub m: f64,
    /// Variance rate `u (1 - u) / (1 + u)^3`.
    pub sigma2: f64,
    /// Set at `u = 0` and `u = 1`, where the limit laws are Dirac masses.
    pub degenerate: bool,
}

/// Scalars for `u` in `[0, 1]`.
///
/// In the interior `gamma`, `m` and `sigma2` are taken from their closed
/// forms in `u`; the forms in `r` are checked against them in debug builds.
pub fn r_scalars(u: f64) -> Result<ScalarBundle> {
    check_unit(u)?;
    let r = rho(u)?;
    if u == 0.0 || u == 1.0 {
        let gamma = if u == 0.0 { 0.0 } else { f64::INFINITY };
        return Ok(ScalarBundle {
            u,
            r,
            gamma,
            gamma2: gamma + 1.0,
            m: 1.0 / (1.0 + u),
            sigma2: 0.0,
            degenerate: true,
        });
    }
    let gamma = u / (1.0 - u);
    let m = 1.0 / (1.0 + u);
    let sigma2 = u * (1.0 - u) / ((1.0 + u) * (1.0 + u) * (1.0 + u));
    debug_assert!(rel_close(gamma_of_r(r)?, gamma, 1e-12));
    debug_assert!(rel_close(m_of_r(r)?, m, 1e-12));
    debug_assert!(rel_close(sigma2_of_r(r)?, sigma2, 1e-12));
    Ok(ScalarBundle {
        u,
        r,
        gamma,
        gamma2: gamma + 1.0,
        m,
        sigma2,
        degenerate: false,
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
