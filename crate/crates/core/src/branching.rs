//! Binary branching paths: simulation, admissibility, summary statistics and
//! the transition likelihood.
//!
//! A path `x_0, x_1, ..., x_n` is admissible when `x_k <= x_{k+1} <= 2 x_k`
//! and every entry is positive. The origin `x_0` is hidden in the estimation
//! problem, so a [`Path`] records whether its first value is `x_0` or `x_1`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{ln_binomial, LogReal};

/// Largest population a simulated path may reach.
pub const MAX_POPULATION: u64 = i64::MAX as u64;

/// Below this expected count of the rarer outcome, binomial draws use
/// sequential inversion.
const INVERSION_CUTOFF: f64 = 30.0;

/// An admissible trajectory of a binary branching process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    values: Vec<u64>,
    origin_included: bool,
}

impl Path {
    pub fn new(values: Vec<u64>, origin_included: bool) -> Result<Self> {
        if let Some(i) = first_violation(&values) {
            let (prev, next) = if i == 0 {
                (0, values[0])
            } else {
                (values[i - 1], values[i])
            };
            return Err(Error::Inadmissible {
                index: i,
                prev,
                next,
            });
        }
        Ok(Path {
            values,
            origin_included,
        })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn origin_included(&self) -> bool {
        self.origin_included
    }

    pub fn origin(&self) -> Option<u64> {
        self.origin_included.then(|| self.values[0])
    }

    /// The observed generations `x_1, ..., x_n`.
    pub fn observations(&self) -> &[u64] {
        if self.origin_included && !self.values.is_empty() {
            &self.values[1..]
        } else {
            &self.values
        }
    }

    /// The path restricted to its first `n` observed generations.
    pub fn prefix(&self, n: usize) -> Result<Path> {
        let extra = usize::from(self.origin_included);
        if n + extra > self.values.len() {
            return Err(Error::PathTooShort {
                needed: n,
                got: self.observations().len(),
            });
        }
        Ok(Path {
            values: self.values[..n + extra].to_vec(),
            origin_included: self.origin_included,
        })
    }

    /// The same path with the origin dropped.
    pub fn hide_origin(&self) -> Path {
        Path {
            values: self.observations().to_vec(),
            origin_included: false,
        }
    }
}

/// Index of the first entry breaking admissibility, if any.
fn first_violation(values: &[u64]) -> Option<usize> {
    if let Some(i) = values.iter().position(|&v| v == 0) {
        return Some(i);
    }
    values
        .windows(2)
        .position(|w| w[1] < w[0] || w[1] > w[0].saturating_mul(2))
        .map(|i| i + 1)
}

/// True iff all entries are positive and `x <= y <= 2x` for consecutive pairs.
pub fn validate_admissible(values: &[u64]) -> bool {
    first_violation(values).is_none()
}

/// Draws `Binomial(n, p)` exactly.
pub(crate) fn sample_binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let flip = p > 0.5;
    let q = if flip { 1.0 - p } else { p };
    let k = if (n as f64) * q < INVERSION_CUTOFF {
        binomial_inversion(rng, n, q)
    } else {
        // BTPE acceptance-rejection; exact, no normal approximation
        Binomial::new(n, q)
            .expect("probability checked above")
            .sample(rng)
    };
    if flip {
        n - k
    } else {
        k
    }
}

fn binomial_inversion<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    let s = p / (1.0 - p);
    let a = (n as f64 + 1.0) * s;
    let p0 = (n as f64 * (-p).ln_1p()).exp();
    loop {
        let mut v: f64 = rng.random();
        let mut pk = p0;
        let mut k = 0u64;
        while v > pk {
            v -= pk;
            k += 1;
            if k > n {
                break;
            }
            pk *= a / k as f64 - s;
        }
        if k <= n {
            return k;
        }
    }
}

/// Simulates `x_0 = x0, ..., x_n` with `x_{k+1} = x_k + Binomial(x_k, u)`.
///
/// The generator is owned by the call and seeded from `seed` alone.
pub fn simulate_path(x0: u64, u: f64, n: usize, seed: u64) -> Result<Path> {
    if x0 == 0 {
        return Err(invalid("initial population must be at least 1"));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(invalid(format!("u must lie in [0, 1], got {u}")));
    }
    if x0 > MAX_POPULATION {
        return Err(Error::Overflow { generation: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n + 1);
    values.push(x0);
    let mut x = x0;
    for k in 1..=n {
        let born = sample_binomial(&mut rng, x, u);
        x = x
            .checked_add(born)
            .filter(|&v| v <= MAX_POPULATION)
            .ok_or(Error::Overflow { generation: k })?;
        values.push(x);
    }
    Ok(Path {
        values,
        origin_included: true,
    })
}

/// Summary statistics of the observed generations `x_1..x_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathStats {
    pub x1: u64,
    pub xn: u64,
    /// `x_1 + ... + x_n`.
    pub sn: u64,
    pub n: usize,
    /// `x_n / s_{n-1}`, the observable estimate of the binary index.
    pub b_hat: f64,
    /// `(s_{n-1} - x_n)^2 / (4 x_n s_{n-1})`, the renormalized index estimate.
    pub r_hat: f64,
}

/// Statistics of the observations of `path`; at least two observed generations.
pub fn path_stats(path: &Path) -> Result<PathStats> {
    let obs = path.observations();
    if obs.len() < 2 {
        return Err(Error::PathTooShort {
            needed: 2,
            got: obs.len(),
        });
    }
    let n = obs.len();
    let sn = obs
        .iter()
        .try_fold(0u64, |acc, &v| acc.checked_add(v))
        .ok_or(Error::Overflow { generation: n })?;
    let x1 = obs[0];
    let xn = obs[n - 1];
    let s_prev = (sn - xn) as f64;
    let xnf = xn as f64;
    let b_hat = xnf / s_prev;
    let gap = s_prev - xnf;
    let r_hat = gap * gap / (4.0 * xnf * s_prev);
    Ok(PathStats {
        x1,
        xn,
        sn,
        n,
        b_hat,
        r_hat,
    })
}

/// `ln P_u(X_{1:n} = x_{1:n} | X_0 = x_0)` for `values = x_0..x_n`.
///
/// Inadmissible transitions have zero likelihood.
pub fn transition_log_likelihood(values: &[u64], u: f64) -> Result<LogReal> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("u must lie in (0, 1), got {u}")));
    }
    if !validate_admissible(values) {
        return Ok(LogReal::ZERO);
    }
    let (ln_u, ln_v) = (u.ln(), (-u).ln_1p());
    let ll = values
        .windows(2)
        .map(|w| {
            let (prev, next) = (w[0], w[1]);
            let born = next - prev;
            let kept = 2 * prev - next;
            ln_binomial(prev, born as i64) + born as f64 * ln_u + kept as f64 * ln_v
        })
        .sum();
    Ok(LogReal::from_ln(ll))
}
