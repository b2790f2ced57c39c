//! Seeded sampling, goodness-of-fit statistics and the verification
//! experiments.
//!
//! All sampling is split into fixed chunks of [`CHUNK`] draws. Chunk `i` uses
//! a ChaCha8 generator seeded with `seed` on stream `i`, so results do not
//! depend on how many worker threads run the chunks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use statrs::function::erf::erfc;

use crate::branching::{sample_binomial, simulate_path};
use crate::error::{invalid, Error, Result};
use crate::hitting::eta_dist;
use crate::kernel::{r_scalars, rho};
use crate::posterior::{jeffreys_pi_n, joint_posterior, limit_posterior, DiscreteDist};

pub const CHUNK: usize = 8192;

pub const CLT_KS_THRESHOLD: f64 = 0.05;
pub const CONSISTENCY_TV_THRESHOLD: f64 = 0.1;
pub const U_SD_THRESHOLD: f64 = 0.05;
pub const U_MEAN_THRESHOLD: f64 = 0.1;
pub const FISHER_REL_THRESHOLD: f64 = 0.02;

const TOLERANCE_NOTE: &str = "desk-scale tolerance, no convergence rate available";

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `draw` for `n` indices split into chunks, each with its own generator.
fn chunked<T, F>(n: usize, seed: u64, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<T>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// `n` i.i.d. draws from `dist` by inversion of its cumulative table.
pub fn sample_discrete(dist: &DiscreteDist, n: usize, seed: u64) -> Vec<u64> {
    let cum = dist.cumulative();
    let lo = dist.support().0;
    let last = cum.len() - 1;
    chunked(n, seed, |rng| {
        let v: f64 = rng.random();
        lo + cum.partition_point(|&c| c <= v).min(last) as u64
    })
}

/// Standard Gaussian distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Kolmogorov distance between the empirical law of `(s - mean) / sqrt(variance)`
/// and the standard Gaussian.
pub fn ks_distance(samples: &[f64], mean: f64, variance: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("ks_distance needs samples"));
    }
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(invalid(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let sd = variance.sqrt();
    let mut z: Vec<f64> = samples.iter().map(|s| (s - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    Ok(z.iter()
        .enumerate()
        .map(|(i, &zi)| {
            let f = normal_cdf(zi);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max))
}

/// Outcome of one experiment; `passed` iff `statistic <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub statistic: f64,
    pub threshold: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(
        name: impl Into<String>,
        params: BTreeMap<String, Value>,
        statistic: f64,
        threshold: f64,
        n_samples: u64,
        seed: u64,
    ) -> Self {
        ExperimentReport {
            name: name.into(),
            params,
            statistic,
            threshold,
            n_samples,
            seed,
            passed: statistic <= threshold,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report fields are always serializable")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CltKind {
    /// The limit posterior `mu(rho(u), x)`.
    Xi,
    /// The hitting-time law of `eta_x`.
    Eta,
}

impl CltKind {
    pub fn name(self) -> &'static str {
        match self {
            CltKind::Xi => "xi",
            CltKind::Eta => "eta",
        }
    }
}

fn check_open_unit(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("u must lie in (0, 1), got {u}")));
    }
    Ok(())
}

/// Distribution sampled by [`clt_experiment`].
pub fn clt_distribution(kind: CltKind, u: f64, x: u64) -> Result<DiscreteDist> {
    check_open_unit(u)?;
    match kind {
        CltKind::Xi => limit_posterior(rho(u)?, x),
        CltKind::Eta => Ok(eta_dist(x, u)?.dist),
    }
}

/// KS distance of `n` draws of `xi_x` or `eta_x` from the Gaussian with mean
/// `m_u x` and variance `sigma^2_u x`.
pub fn clt_experiment(
    kind: CltKind,
    u: f64,
    x: u64,
    n: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if x < 64 {
        return Err(invalid(format!("clt experiment needs x >= 64, got {x}")));
    }
    if n == 0 {
        return Err(invalid("clt experiment needs at least one sample"));
    }
    let dist = clt_distribution(kind, u, x)?;
    let s = r_scalars(u)?;
    let samples: Vec<f64> = sample_discrete(&dist, n, seed)
        .into_iter()
        .map(|v| v as f64)
        .collect();
    let xf = x as f64;
    let statistic = ks_distance(&samples, s.m * xf, s.sigma2 * xf)?;
    let params = BTreeMap::from([
        ("kind".to_string(), json!(kind.name())),
        ("u".to_string(), json!(u)),
        ("x".to_string(), json!(x)),
        ("mean".to_string(), json!(s.m * xf)),
        ("variance".to_string(), json!(s.sigma2 * xf)),
        ("tolerance".to_string(), json!(TOLERANCE_NOTE)),
    ]);
    Ok(ExperimentReport::new(
        format!("clt_{}", kind.name()),
        params,
        statistic,
        CLT_KS_THRESHOLD,
        n as u64,
        seed,
    ))
}

/// Simulates one path and, for each horizon in `n_list`, compares the joint
/// posterior with its limit.
///
/// Three reports per horizon: total variation between the `X_0` marginal and
/// `mu(rho(u), x_1)`, the posterior sd of `U`, and the error of the posterior
/// mean of `U`. `u = 0` is accepted and gives a constant path.
pub fn posterior_consistency_experiment(
    u: f64,
    x0: u64,
    n_list: &[usize],
    seed: u64,
) -> Result<Vec<ExperimentReport>> {
    if !(0.0..1.0).contains(&u) {
        return Err(invalid(format!("u must lie in [0, 1), got {u}")));
    }
    if n_list.is_empty() {
        return Err(Error::Empty("n_list"));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n < 5) {
        return Err(invalid(format!(
            "every horizon must be at least 5, got {bad}"
        )));
    }
    let n_max = *n_list.iter().max().unwrap_or(&5);
    let path = simulate_path(x0, u, n_max, seed)?;
    let r = rho(u)?;
    let mut reports = Vec::with_capacity(3 * n_list.len());
    for &n in n_list {
        let jp = joint_posterior(&path.prefix(n)?)?;
        let limit = limit_posterior(r, jp.x1)?;
        let tv = jp.x0_marginal.tv_distance(&limit);
        let params = BTreeMap::from([
            ("u".to_string(), json!(u)),
            ("x0".to_string(), json!(x0)),
            ("n".to_string(), json!(n)),
            ("x1".to_string(), json!(jp.x1)),
            ("xn".to_string(), json!(jp.xn)),
            ("sn".to_string(), json!(jp.sn)),
            ("u_mean".to_string(), json!(jp.u_mean)),
            ("u_sd".to_string(), json!(jp.u_sd)),
            ("tolerance".to_string(), json!(TOLERANCE_NOTE)),
        ]);
        let samples = n as u64;
        reports.push(ExperimentReport::new(
            "consistency_tv",
            params.clone(),
            tv,
            CONSISTENCY_TV_THRESHOLD,
            samples,
            seed,
        ));
        reports.push(ExperimentReport::new(
            "consistency_u_sd",
            params.clone(),
            jp.u_sd,
            U_SD_THRESHOLD,
            samples,
            seed,
        ));
        reports.push(ExperimentReport::new(
            "consistency_u_mean",
            params,
            (jp.u_mean - u).abs(),
            U_MEAN_THRESHOLD,
            samples,
            seed,
        ));
    }
    Ok(reports)
}

/// `E[(X_n - X_0)/u^2 + (S_n - 2 X_n + 2 X_0)/(1 - u)^2]` when `E(X_0) = lambda0`,
/// summed from `E(X_k) = lambda0 (1 + u)^k`.
pub fn fisher_info_exact(u: f64, n: u64, lambda0: f64) -> Result<f64> {
    check_open_unit(u)?;
    let moments: Vec<f64> = (0..=n)
        .map(|k| lambda0 * (1.0 + u).powf(k as f64))
        .collect();
    let (first, last) = (moments[0], moments[n as usize]);
    let sum: f64 = moments[1..].iter().sum();
    Ok((last - first) / (u * u) + (sum - 2.0 * last + 2.0 * first) / ((1.0 - u) * (1.0 - u)))
}

/// The score-square statistic of one path started from `X_0 ~ Poisson(lambda0)`.
fn fisher_draw(rng: &mut ChaCha8Rng, poisson: &Poisson<f64>, u: f64, n: u64) -> f64 {
    let x0 = poisson.sample(rng) as u64;
    if x0 == 0 {
        return 0.0;
    }
    let mut x = x0;
    let mut sn = 0u64;
    for _ in 0..n {
        x += sample_binomial(rng, x, u);
        sn += x;
    }
    let (x0, xn, sn) = (x0 as f64, x as f64, sn as f64);
    (xn - x0) / (u * u) + (sn - 2.0 * xn + 2.0 * x0) / ((1.0 - u) * (1.0 - u))
}

/// Relative gap between the Monte Carlo mean of the score-square statistic
/// over `m` paths and `lambda0 pi_n(u)^2`.
pub fn fisher_info_experiment(
    u: f64,
    n: u64,
    lambda0: f64,
    m: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    check_open_unit(u)?;
    if n < 1 {
        return Err(invalid("n must be at least 1"));
    }
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let poisson = Poisson::new(lambda0).map_err(|_| {
        invalid(format!(
            "lambda0 must be positive and finite, got {lambda0}"
        ))
    })?;
    let target = lambda0 * jeffreys_pi_n(n, u)?.powi(2);
    let draws = chunked(m, seed, |rng| fisher_draw(rng, &poisson, u, n));
    let mean = draws.iter().sum::<f64>() / m as f64;
    let statistic = (mean - target).abs() / target;
    let params = BTreeMap::from([
        ("u".to_string(), json!(u)),
        ("n".to_string(), json!(n)),
        ("lambda0".to_string(), json!(lambda0)),
        ("empirical_mean".to_string(), json!(mean)),
        ("target".to_string(), json!(target)),
        ("tolerance".to_string(), json!(TOLERANCE_NOTE)),
    ]);
    Ok(ExperimentReport::new(
        "fisher_info",
        params,
        statistic,
        FISHER_REL_THRESHOLD,
        m as u64,
        seed,
    ))
}
