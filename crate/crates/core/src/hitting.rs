//! Hitting-time estimation of the initial population.
//!
//! Reading one branching path generation by generation, `sigma_y` is the
//! total number of children of `y` individuals; it has steps in `{1, 2}`.
//! `H_x` is the event that `sigma` visits `x`, and `eta_x` is the `y` at which
//! it does, conditionally on `H_x`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::kernel::{gamma_of_r, ln_binomial, rho};
use crate::posterior::DiscreteDist;

fn check_open_unit(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("u must lie in (0, 1), got {u}")));
    }
    Ok(())
}

fn check_positive(x: u64, name: &str) -> Result<()> {
    if x < 1 {
        return Err(invalid(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// `(-u)^k` with the sign tracked explicitly.
fn neg_pow(u: f64, k: u64) -> f64 {
    let mag = u.powf(k as f64);
    if k.is_multiple_of(2) {
        mag
    } else {
        -mag
    }
}

/// `P(sigma_y = x) = C(y, x - y) u^(x - y) (1 - u)^(2y - x)`, with `sigma_0 = 0`.
pub fn sigma_pmf(y: u64, x: i64, u: f64) -> Result<f64> {
    check_open_unit(u)?;
    Ok(ln_sigma_pmf(y, x, u).exp())
}

fn ln_sigma_pmf(y: u64, x: i64, u: f64) -> f64 {
    let yi = y as i64;
    if x < yi || x > 2 * yi {
        return f64::NEG_INFINITY;
    }
    let doubled = (x - yi) as f64;
    let single = (2 * yi - x) as f64;
    let mut v = ln_binomial(y, x - yi);
    if doubled > 0.0 {
        v += doubled * u.ln();
    }
    if single > 0.0 {
        v += single * (-u).ln_1p();
    }
    v
}

/// `P(H_x) = (1 - (-u)^(x + 1)) / (1 + u)`.
pub fn hitting_prob(x: u64, u: f64) -> Result<f64> {
    check_positive(x, "x")?;
    check_open_unit(u)?;
    Ok((1.0 - neg_pow(u, x + 1)) / (1.0 + u))
}

/// Law of `eta_x` together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingDist {
    pub x: u64,
    pub u: f64,
    pub hitting_prob: f64,
    #[serde(flatten)]
    pub dist: DiscreteDist,
}

/// `P(eta_x = y) = P(sigma_y = x) / P(H_x)` on `y = h(x)..=x`.
pub fn eta_dist(x: u64, u: f64) -> Result<HittingDist> {
    check_positive(x, "x")?;
    check_open_unit(u)?;
    let lo = x.div_ceil(2);
    let weights = (lo..=x).map(|y| ln_sigma_pmf(y, x as i64, u)).collect();
    Ok(HittingDist {
        x,
        u,
        hitting_prob: hitting_prob(x, u)?,
        dist: DiscreteDist::from_log_weights(lo, weights)?,
    })
}

/// Normalization of `nu_eta(r, x) = sum_y C(y, x - y) 4^y r^y delta_y`.
///
/// `r = inf` gives the Dirac mass at `x`, `r = 0` the Dirac mass at `h(x)`.
pub fn mu_eta(r: f64, x: u64) -> Result<DiscreteDist> {
    check_positive(x, "x")?;
    if r.is_nan() || r < 0.0 {
        return Err(invalid(format!("r must lie in [0, +inf], got {r}")));
    }
    let lo = x.div_ceil(2);
    if r == f64::INFINITY {
        return Ok(DiscreteDist::dirac(x));
    }
    if r == 0.0 {
        return Ok(DiscreteDist::dirac(lo));
    }
    let ln_4r = (4.0 * r).ln();
    let weights = (lo..=x)
        .map(|y| ln_binomial(y, (x - y) as i64) + y as f64 * ln_4r)
        .collect();
    DiscreteDist::from_log_weights(lo, weights)
}

/// `P(zeta_x = y)` for the first passage `zeta_x = inf{y >= 1 : sigma_y >= x}`.
///
/// The walk either sits at `x - 1` after `y - 1` steps and takes any step,
/// or sits at `x - 2` and takes a double step.
pub fn zeta_pmf(x: u64, y: u64, u: f64) -> Result<f64> {
    check_positive(x, "x")?;
    check_positive(y, "y")?;
    check_open_unit(u)?;
    let (x, prev) = (x as i64, y - 1);
    let at = |target: i64| -> f64 {
        if prev == 0 {
            return if target == 0 { 1.0 } else { 0.0 };
        }
        ln_sigma_pmf(prev, target, u).exp()
    };
    Ok(at(x - 1) + u * at(x - 2))
}

/// Largest absolute gap, over the support of `eta_x`, between `P(eta_x = y)`
/// and `(1 + u) / (1 - (-u)^(x + 1)) sum_{z < x} (-u)^z P(zeta_{x + 1 - z} = y + 1)`.
pub fn eta_alternating_identity_check(x: u64, u: f64) -> Result<f64> {
    let eta = eta_dist(x, u)?;
    let scale = (1.0 + u) / (1.0 - neg_pow(u, x + 1));
    let mut worst = 0.0f64;
    for (y, p) in eta.dist.iter() {
        let mut sum = 0.0;
        for z in 0..x {
            sum += neg_pow(u, z) * zeta_pmf(x + 1 - z, y + 1, u)?;
        }
        worst = worst.max((p - scale * sum).abs());
    }
    Ok(worst)
}

/// `E(eta_x) = (x + 1)/(1 + u) (1 + (-u)^(x + 2)) / (1 - (-u)^(x + 1)) - (1 + u^2)/(1 + u)^2`.
pub fn eta_mean_exact(x: u64, u: f64) -> Result<f64> {
    check_positive(x, "x")?;
    check_open_unit(u)?;
    let xf = x as f64;
    let ratio = (1.0 + neg_pow(u, x + 2)) / (1.0 - neg_pow(u, x + 1));
    Ok((xf + 1.0) / (1.0 + u) * ratio - (1.0 + u * u) / ((1.0 + u) * (1.0 + u)))
}

/// `E(eta_x)` summed from [`eta_dist`].
pub fn eta_mean_direct(x: u64, u: f64) -> Result<f64> {
    Ok(eta_dist(x, u)?.dist.mean())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaMeanBounds {
    pub lower: f64,
    pub upper: f64,
    /// For odd `x`, whether `E(eta_x) >= x/(1 + u)`; for even `x`, whether
    /// `E(eta_x) <= x/(1 + u) + u(1 - u)/(1 + u)`.
    pub parity_bound_ok: bool,
}

/// Bounds `x/(1 + u) - 2u^2/(1 + u)^2 <= E(eta_x) <= x/(1 + u) + 2u/(1 + u)^2`.
pub fn eta_mean_bounds(x: u64, u: f64) -> Result<EtaMeanBounds> {
    let mean = eta_mean_exact(x, u)?;
    let base = x as f64 / (1.0 + u);
    let sq = (1.0 + u) * (1.0 + u);
    let slack = 1e-12 * base.max(1.0);
    let parity_bound_ok = if x % 2 == 1 {
        mean >= base - slack
    } else {
        mean <= base + u * (1.0 - u) / (1.0 + u) + slack
    };
    Ok(EtaMeanBounds {
        lower: base - 2.0 * u * u / sq,
        upper: base + 2.0 * u / sq,
        parity_bound_ok,
    })
}

/// `ln g_x(r)` for `g_x(r) = gamma gamma2 / (gamma + gamma2) (gamma^-(x+1) - (-gamma2)^-(x+1))`,
/// the `x`-th coefficient of `1 / (1 - 4 r z (1 + z))`.
pub fn ln_g_closed_form(r: f64, x: u64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("r must be positive and finite, got {r}")));
    }
    let g = gamma_of_r(r)?;
    let g2 = g + 1.0;
    let k = (x + 1) as f64;
    let tail = neg_pow(g / g2, x + 1);
    Ok((g * g2 / (g + g2)).ln() - k * g.ln() + (-tail).ln_1p())
}

pub fn g_closed_form(r: f64, x: u64) -> Result<f64> {
    Ok(ln_g_closed_form(r, x)?.exp())
}

/// `mu_eta(rho(u), x)`, the tilted form of [`eta_dist`].
pub fn eta_dist_tilted(x: u64, u: f64) -> Result<DiscreteDist> {
    check_open_unit(u)?;
    mu_eta(rho(u)?, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::c_lambda_table;
    use crate::kernel::exact::{nu_eta_weights, rational, to_f64};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const US: [f64; 3] = [0.1, 0.5, 0.9];

    #[test]
    fn sigma_examples() {
        let u = 0.3;
        assert_relative_eq!(sigma_pmf(1, 1, u).unwrap(), 0.7, epsilon = 1e-15);
        assert_relative_eq!(
            sigma_pmf(2, 3, u).unwrap(),
            2.0 * u * (1.0 - u),
            epsilon = 1e-15
        );
        assert_eq!(sigma_pmf(2, 5, u).unwrap(), 0.0);
        assert_eq!(sigma_pmf(3, 2, u).unwrap(), 0.0);
    }

    #[test]
    fn sigma_is_complete() {
        for u in US {
            for y in 1..=30u64 {
                let total: f64 = (y..=2 * y)
                    .map(|x| sigma_pmf(y, x as i64, u).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hitting_prob_examples() {
        for u in US {
            assert_relative_eq!(hitting_prob(1, u).unwrap(), 1.0 - u, epsilon = 1e-15);
        }
        assert_relative_eq!(hitting_prob(2, 0.5).unwrap(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn hitting_prob_matches_brute_force() {
        for u in US {
            for x in 1..=40u64 {
                let direct: f64 = (1..=x).map(|y| sigma_pmf(y, x as i64, u).unwrap()).sum();
                assert!((hitting_prob(x, u).unwrap() - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eta_examples() {
        let d = eta_dist(2, 0.5).unwrap();
        assert_eq!(d.dist.support(), (1, 2));
        assert_relative_eq!(d.dist.probs()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(d.dist.probs()[1], 1.0 / 3.0, epsilon = 1e-15);

        let r: f64 = 0.3;
        let m = mu_eta(r, 2).unwrap();
        assert_relative_eq!(m.probs()[0], 1.0 / (1.0 + 4.0 * r), epsilon = 1e-15);
        let m = mu_eta(r, 4).unwrap();
        let w = [1.0, 12.0 * r, 16.0 * r * r];
        let total: f64 = w.iter().sum();
        for (p, w) in m.probs().iter().zip(w) {
            assert_relative_eq!(*p, w / total, epsilon = 1e-15);
        }
    }

    #[test]
    fn eta_normalized_with_expected_support() {
        for u in US {
            for x in 1..=200u64 {
                let d = eta_dist(x, u).unwrap();
                assert_eq!(d.dist.support(), (x.div_ceil(2), x));
                assert!((d.dist.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eta_normalizes_sigma_by_hitting_prob() {
        for u in US {
            for x in 1..=60u64 {
                let d = eta_dist(x, u).unwrap();
                for (y, p) in d.dist.iter() {
                    let direct = sigma_pmf(y, x as i64, u).unwrap() / d.hitting_prob;
                    assert!((p - direct).abs() < 1e-12, "u = {u}, x = {x}, y = {y}");
                }
            }
        }
    }

    #[test]
    fn eta_equals_tilted_measure() {
        for u in [0.1, 0.25, 0.5, 0.75, 0.9] {
            for x in 1..=200u64 {
                let a = eta_dist(x, u).unwrap();
                let b = eta_dist_tilted(x, u).unwrap();
                for (p, q) in a.dist.probs().iter().zip(b.probs()) {
                    assert!((p - q).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tilted_measure_matches_exact_weights() {
        for x in 1..=25u64 {
            let w = nu_eta_weights(&rational(1, 8), x);
            let total: f64 = w.iter().map(to_f64).sum();
            let d = mu_eta(0.125, x).unwrap();
            for (p, w) in d.probs().iter().zip(&w) {
                assert!((p - to_f64(w) / total).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tilted_measure_endpoints() {
        assert_eq!(mu_eta(f64::INFINITY, 7).unwrap(), DiscreteDist::dirac(7));
        assert_eq!(mu_eta(0.0, 7).unwrap(), DiscreteDist::dirac(4));
    }

    #[test]
    fn zeta_examples() {
        let u = 0.35;
        assert_relative_eq!(zeta_pmf(2, 1, u).unwrap(), u, epsilon = 1e-15);
        assert_relative_eq!(zeta_pmf(2, 2, u).unwrap(), 1.0 - u, epsilon = 1e-15);
        for z in 3..10 {
            assert_eq!(zeta_pmf(z, 1, u).unwrap(), 0.0);
        }
        assert_eq!(zeta_pmf(1, 1, u).unwrap(), 1.0);
    }

    #[test]
    fn zeta_is_complete() {
        for u in US {
            for x in 1..=40u64 {
                let total: f64 = (1..=x).map(|y| zeta_pmf(x, y, u).unwrap()).sum();
                assert!((total - 1.0).abs() < 1e-12, "u = {u}, x = {x}");
            }
        }
    }

    #[test]
    fn zeta_matches_renewal_simulation() {
        let (x, u, reps) = (9u64, 0.4, 200_000usize);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = vec![0usize; x as usize + 1];
        for _ in 0..reps {
            let (mut sum, mut y) = (0u64, 0usize);
            while sum < x {
                sum += if rng.random::<f64>() < u { 2 } else { 1 };
                y += 1;
            }
            counts[y] += 1;
        }
        for y in 1..=x {
            let p = zeta_pmf(x, y, u).unwrap();
            let se = (p * (1.0 - p) / reps as f64).sqrt().max(1e-9);
            let freq = counts[y as usize] as f64 / reps as f64;
            assert!((freq - p).abs() <= 4.0 * se, "y = {y}: {freq} vs {p}");
        }
    }

    #[test]
    fn alternating_identity() {
        assert!(eta_alternating_identity_check(1, 0.3).unwrap() <= 4.0 * f64::EPSILON);
        assert!(eta_alternating_identity_check(2, 0.5).unwrap() <= 1e-12);
        for u in US {
            for x in 1..=30u64 {
                assert!(eta_alternating_identity_check(x, u).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn mean_examples() {
        for u in US {
            assert_relative_eq!(eta_mean_exact(1, u).unwrap(), 1.0, epsilon = 1e-14);
            assert_relative_eq!(
                eta_mean_exact(2, u).unwrap(),
                2.0 - u / (1.0 - u * (1.0 - u)),
                epsilon = 1e-14
            );
        }
        assert_relative_eq!(eta_mean_exact(2, 0.5).unwrap(), 4.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn mean_closed_form_matches_direct() {
        for i in 1..20 {
            let u = i as f64 / 20.0;
            for x in 1..=200u64 {
                let a = eta_mean_exact(x, u).unwrap();
                let b = eta_mean_direct(x, u).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.max(1.0), "u = {u}, x = {x}");
            }
        }
    }

    #[test]
    fn mean_bounds() {
        for i in 1..50 {
            let u = i as f64 / 50.0;
            for x in 1..=100u64 {
                let mean = eta_mean_exact(x, u).unwrap();
                let base = x as f64 / (1.0 + u);
                let b = eta_mean_bounds(x, u).unwrap();
                assert!((mean - base).abs() <= 2.0 * u / (1.0 + u).powi(2) + 1e-12);
                assert!(2.0 * u / (1.0 + u).powi(2) <= 0.5);
                assert!(b.lower - 1e-12 <= mean && mean <= b.upper + 1e-12);
                assert!(b.parity_bound_ok, "u = {u}, x = {x}");
                assert_relative_eq!(b.upper - b.lower, 2.0 * u / (1.0 + u), epsilon = 1e-12);
                assert!(b.upper - b.lower <= 1.0);
            }
        }
    }

    #[test]
    fn g_examples() {
        for r in [0.01, 0.125, 1.0, 9.0] {
            assert_relative_eq!(g_closed_form(r, 0).unwrap(), 1.0, epsilon = 1e-13);
        }
        assert_relative_eq!(g_closed_form(0.125, 2).unwrap(), 0.75, epsilon = 1e-14);
        assert!(g_closed_form(0.0, 2).is_err());
    }

    #[test]
    fn g_matches_coefficients_and_direct_sum() {
        for r in [0.125, 1.0, 4.0] {
            let t = c_lambda_table(1.0, r, 60).unwrap();
            for x in 0..=60u64 {
                let g = ln_g_closed_form(r, x).unwrap();
                assert_relative_eq!(g, t.get(x as i64).ln(), epsilon = 1e-9);
                let direct: f64 = (x.div_ceil(2)..=x)
                    .map(|y| (ln_binomial(y, (x - y) as i64) + y as f64 * (4.0 * r).ln()).exp())
                    .sum();
                assert_relative_eq!(g.exp(), direct, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn serializes_with_hitting_prob() {
        let v = serde_json::to_value(eta_dist(3, 0.5).unwrap()).unwrap();
        assert_eq!(v["support"], serde_json::json!([2, 3]));
        assert!(v["probs"].is_array());
        assert!(v["log_weights"].is_array());
        assert!(v["hitting_prob"].is_number());
    }
}
