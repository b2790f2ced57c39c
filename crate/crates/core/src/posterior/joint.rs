//! Finite-horizon joint posterior of `(X_0, U)` under the Jeffreys priors.
//!
//! Given observations `x_1, ..., x_n` the posterior is proportional to
//!
//! ```text
//! sum_{x0} d(x0) C(x0, x1 - x0) u^(xn - x0) (1 - u)^(sn - 2 xn + 2 x0) pi_n(u) delta_{x0} du
//! ```
//!
//! with `d(x) = 2^(-2x) C(2x, x)`. With `u = sin^2(theta)` the measure
//! `pi_n(u) du` becomes `2 q_n(sin^2 theta) d theta`, which is bounded, and the
//! integrand is even around both ends of `[0, pi/2]`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::dist::DiscreteDist;
use super::prior::{ln_marginal_x0_weight, ln_q_n};
use super::quad::{adaptive_simpson, golden_max};
use crate::branching::Path;
use crate::error::{Error, Result};
use crate::kernel::ln_binomial;

pub const REL_TOL: f64 = 1e-8;
pub const MAX_EVALUATIONS: usize = 1 << 20;

const SCAN_POINTS: usize = 65;
const WINDOW_WIDTHS: f64 = 14.0;
const MIN_UNIFORM_CELLS: usize = 4096;
const MAX_CELLS: usize = 1 << 15;
const COARSE_CELLS: usize = 512;

/// Posterior of `(X_0, U)` after `n` observed generations.
#[derive(Debug, Clone)]
pub struct JointPosterior {
    pub x1: u64,
    pub xn: u64,
    pub sn: u64,
    pub n: usize,
    /// Marginal of `X_0` on `h(x1)..=x1`.
    pub x0_marginal: DiscreteDist,
    /// `E(U | X_0 = x0)` for each `x0` in the support.
    pub u_conditional_mean: Vec<f64>,
    pub u_conditional_sd: Vec<f64>,
    /// Grid nodes in `(0, 1)`.
    pub u_grid: Vec<f64>,
    /// Quadrature weights attached to `u_grid`.
    pub u_weights: Vec<f64>,
    /// Conditional densities of `U`, one row per `x0`, on `u_grid`.
    pub u_conditional: Vec<Vec<f64>>,
    /// Marginal density of `U` on `u_grid`.
    pub u_density: Vec<f64>,
    pub u_mean: f64,
    pub u_sd: f64,
}

impl JointPosterior {
    pub fn x0_support(&self) -> (u64, u64) {
        self.x0_marginal.support()
    }

    /// `sum_i density_i * weight_i` for one conditional row.
    pub fn grid_mass(&self, row: usize) -> f64 {
        self.u_conditional[row]
            .iter()
            .zip(&self.u_weights)
            .map(|(d, w)| d * w)
            .sum()
    }
}

impl Serialize for JointPosterior {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let probs: BTreeMap<u64, f64> = self.x0_marginal.iter().collect();
        let mut s = serializer.serialize_struct("JointPosterior", 10)?;
        s.serialize_field("x1", &self.x1)?;
        s.serialize_field("xn", &self.xn)?;
        s.serialize_field("sn", &self.sn)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("x0_probs", &probs)?;
        s.serialize_field("u_mean", &self.u_mean)?;
        s.serialize_field("u_sd", &self.u_sd)?;
        s.serialize_field("u_grid", &self.u_grid)?;
        s.serialize_field("u_weights", &self.u_weights)?;
        s.serialize_field("u_density", &self.u_density)?;
        s.end()
    }
}

/// Log of the `theta` integrand `2 sin^(2a) cos^(2b) q_n(sin^2)` for one `x0`,
/// up to the additive constant `-2a ln sin(t0) - 2b ln cos(t0)` where
/// `tan^2(t0) = a / b` maximizes the trigonometric factor.
///
/// With `d = theta - t0` the ratios `sin(theta)/sin(t0)` and `cos(theta)/cos(t0)`
/// are `1 - 2 sin^2(d/2) +- cot(t0) sin(d)` and are taken through `ln_1p`, so
/// the huge exponents do not amplify rounding near the peak.
#[derive(Debug, Clone, Copy)]
struct Integrand {
    a: u64,
    b: u64,
    n: u64,
    t0: f64,
    tan0: f64,
    cot0: f64,
}

fn ln_ratio(arg: f64) -> f64 {
    if arg <= -1.0 {
        f64::NEG_INFINITY
    } else {
        arg.ln_1p()
    }
}

impl Integrand {
    fn new(a: u64, b: u64, n: u64) -> Self {
        let (t0, tan0, cot0) = match (a, b) {
            (0, _) => (0.0, 0.0, f64::INFINITY),
            (_, 0) => (FRAC_PI_2, f64::INFINITY, 0.0),
            _ => {
                let t = (a as f64 / b as f64).sqrt();
                (t.atan(), t, 1.0 / t)
            }
        };
        Integrand {
            a,
            b,
            n,
            t0,
            tan0,
            cot0,
        }
    }

    fn ln(&self, theta: f64) -> f64 {
        let s = theta.sin();
        let mut v = std::f64::consts::LN_2 + ln_q_n(self.n, s * s);
        let d = theta - self.t0;
        let half = (0.5 * d).sin();
        let bend = -2.0 * half * half;
        if self.a > 0 {
            v += 2.0 * self.a as f64 * ln_ratio(bend + self.cot0 * d.sin());
        }
        if self.b > 0 {
            v += 2.0 * self.b as f64 * ln_ratio(bend - self.tan0 * d.sin());
        }
        v
    }

    /// `2a ln sin(t0) + 2b ln cos(t0) = a ln(a/(a+b)) + b ln(b/(a+b))`.
    fn offset(&self) -> f64 {
        let total = (self.a + self.b) as f64;
        let term = |k: u64| {
            if k == 0 {
                0.0
            } else {
                k as f64 * (k as f64 / total).ln()
            }
        };
        term(self.a) + term(self.b)
    }

    fn width(&self) -> f64 {
        0.5 / ((self.a + self.b + 1) as f64).sqrt()
    }

    fn peak(&self) -> (f64, f64) {
        let step = FRAC_PI_2 / (SCAN_POINTS - 1) as f64;
        let mut nodes: Vec<f64> = (0..SCAN_POINTS).map(|i| i as f64 * step).collect();
        nodes.push(self.t0);
        nodes.sort_by(f64::total_cmp);
        let values: Vec<f64> = nodes.iter().map(|&t| self.ln(t)).collect();
        let best = (0..nodes.len())
            .max_by(|&i, &j| values[i].total_cmp(&values[j]).then(j.cmp(&i)))
            .unwrap_or(0);
        let lo = nodes[best.saturating_sub(1)];
        let hi = nodes[(best + 1).min(nodes.len() - 1)];
        let theta = golden_max(|t| self.ln(t), lo, hi, 1e-15 + 1e-3 * self.width().min(1.0));
        let (mut arg, mut max) = (theta, self.ln(theta));
        if values[best] > max {
            arg = nodes[best];
            max = values[best];
        }
        (arg, max)
    }
}

struct Conditional {
    ln_weight: f64,
    ln_integral: f64,
    peak: f64,
    width: f64,
    mean: f64,
    sd: f64,
}

fn breakpoints(peak: f64, width: f64) -> Vec<f64> {
    let mut bp = vec![0.0, FRAC_PI_2];
    for k in [-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let t = peak + k * width;
        if t > 0.0 && t < FRAC_PI_2 {
            bp.push(t);
        }
    }
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    bp
}

fn conditional(x0: u64, x1: u64, f: Integrand) -> Result<Conditional> {
    let (peak, max) = f.peak();
    let width = f.width();
    let bp = breakpoints(peak, width);
    let scaled = |t: f64| (f.ln(t) - max).exp();
    let mass = adaptive_simpson(scaled, &bp, REL_TOL, MAX_EVALUATIONS)?;
    let first = adaptive_simpson(
        |t| t.sin().powi(2) * scaled(t),
        &bp,
        REL_TOL,
        MAX_EVALUATIONS,
    )?;
    let mean = first / mass;
    let second = adaptive_simpson(
        |t| (t.sin().powi(2) - mean).powi(2) * scaled(t),
        &bp,
        REL_TOL,
        MAX_EVALUATIONS,
    )?;
    let ln_integral = max + mass.ln();
    let ln_weight =
        ln_marginal_x0_weight(x0)? + ln_binomial(x0, (x1 - x0) as i64) + f.offset() + ln_integral;
    Ok(Conditional {
        ln_weight,
        ln_integral,
        peak,
        width,
        mean,
        sd: (second / mass).max(0.0).sqrt(),
    })
}

/// Midpoint cells in `theta`, fine around the peaks and coarse elsewhere.
fn theta_cells(conds: &[Conditional]) -> Vec<(f64, f64)> {
    let w_max = conds.iter().map(|c| c.width).fold(0.0, f64::max);
    let w_min = conds.iter().map(|c| c.width).fold(f64::INFINITY, f64::min);
    let lo = conds.iter().map(|c| c.peak).fold(f64::INFINITY, f64::min) - WINDOW_WIDTHS * w_max;
    let hi = conds.iter().map(|c| c.peak).fold(0.0, f64::max) + WINDOW_WIDTHS * w_max;
    let (lo, hi) = (lo.max(0.0), hi.min(FRAC_PI_2));
    let fine = w_min / 4.0;

    let mut cells = Vec::new();
    let push_uniform = |a: f64, b: f64, count: usize, cells: &mut Vec<(f64, f64)>| {
        let h = (b - a) / count as f64;
        for i in 0..count {
            cells.push((a + (i as f64 + 0.5) * h, h));
        }
    };
    if hi - lo > FRAC_PI_2 / 2.0 {
        let count = ((FRAC_PI_2 / fine).ceil() as usize).clamp(MIN_UNIFORM_CELLS, MAX_CELLS);
        push_uniform(0.0, FRAC_PI_2, count, &mut cells);
        return cells;
    }
    let coarse = FRAC_PI_2 / COARSE_CELLS as f64;
    if lo > 0.0 {
        push_uniform(0.0, lo, ((lo / coarse).ceil() as usize).max(1), &mut cells);
    }
    let count = (((hi - lo) / fine).ceil() as usize).clamp(1200, MAX_CELLS);
    push_uniform(lo, hi, count, &mut cells);
    if hi < FRAC_PI_2 {
        let rest = FRAC_PI_2 - hi;
        push_uniform(
            hi,
            FRAC_PI_2,
            ((rest / coarse).ceil() as usize).max(1),
            &mut cells,
        );
    }
    cells
}

/// Joint posterior of `(X_0, U)` given the observed generations of `path`.
///
/// The origin is ignored if present. Needs at least two observed generations.
pub fn joint_posterior(path: &Path) -> Result<JointPosterior> {
    let obs = path.observations();
    if obs.len() < 2 {
        return Err(Error::PathTooShort {
            needed: 2,
            got: obs.len(),
        });
    }
    let n = obs.len();
    let x1 = obs[0];
    let xn = obs[n - 1];
    let sn: u64 = obs.iter().sum();
    let h = x1.div_ceil(2);

    let integrands = (h..=x1)
        .map(|x0| {
            let a = xn.checked_sub(x0);
            let b = (sn + 2 * x0).checked_sub(2 * xn);
            match (a, b) {
                (Some(a), Some(b)) => Ok((x0, Integrand::new(a, b, n as u64))),
                _ => Err(Error::Inadmissible {
                    index: 0,
                    prev: x0,
                    next: x1,
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let conds = integrands
        .par_iter()
        .map(|&(x0, f)| conditional(x0, x1, f))
        .collect::<Result<Vec<_>>>()?;

    let x0_marginal =
        DiscreteDist::from_log_weights(h, conds.iter().map(|c| c.ln_weight).collect())?;

    let cells = theta_cells(&conds);
    let u_grid: Vec<f64> = cells.iter().map(|&(t, _)| t.sin().powi(2)).collect();
    let u_weights: Vec<f64> = cells.iter().map(|&(t, h)| h * (2.0 * t).sin()).collect();
    let u_conditional: Vec<Vec<f64>> = integrands
        .par_iter()
        .zip(&conds)
        .map(|(&(_, f), c)| {
            cells
                .iter()
                .map(|&(t, _)| (f.ln(t) - c.ln_integral).exp() / (2.0 * t).sin())
                .collect()
        })
        .collect();
    let probs = x0_marginal.probs();
    let u_density = (0..cells.len())
        .map(|i| {
            probs
                .iter()
                .zip(&u_conditional)
                .map(|(p, row)| p * row[i])
                .sum()
        })
        .collect();

    let u_mean: f64 = probs.iter().zip(&conds).map(|(p, c)| p * c.mean).sum();
    let second: f64 = probs
        .iter()
        .zip(&conds)
        .map(|(p, c)| p * (c.sd * c.sd + (c.mean - u_mean).powi(2)))
        .sum();

    Ok(JointPosterior {
        x1,
        xn,
        sn,
        n,
        x0_marginal,
        u_conditional_mean: conds.iter().map(|c| c.mean).collect(),
        u_conditional_sd: conds.iter().map(|c| c.sd).collect(),
        u_grid,
        u_weights,
        u_conditional,
        u_density,
        u_mean,
        u_sd: second.max(0.0).sqrt(),
    })
}
