use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{invalid, Error, Result};
use crate::kernel::exact::{ln_big, to_f64};
use crate::kernel::log_sum_exp_ln;

/// A finite distribution on a contiguous range of positive integers.
///
/// Weights are kept unnormalized in log space next to the normalized
/// probabilities. Distributions built from rational weights also keep the
/// exact normalized probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    lo: u64,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl DiscreteDist {
    /// Normalizes `log_weights`, placed on `lo, lo + 1, ...`.
    pub fn from_log_weights(lo: u64, log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::Empty(
                "distribution needs at least one support point",
            ));
        }
        if log_weights
            .iter()
            .any(|w| w.is_nan() || *w == f64::INFINITY)
        {
            return Err(Error::NumericalOverflow("non-finite log weight".into()));
        }
        let total = log_sum_exp_ln(&log_weights);
        if total == f64::NEG_INFINITY {
            return Err(invalid("all weights are zero"));
        }
        let mut probs: Vec<f64> = log_weights.iter().map(|w| (w - total).exp()).collect();
        let mass: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= mass);
        Ok(DiscreteDist {
            lo,
            log_weights,
            probs,
            exact: None,
        })
    }

    /// Exact distribution from nonnegative rational weights.
    pub fn from_exact_weights(lo: u64, weights: Vec<BigRational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty(
                "distribution needs at least one support point",
            ));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(invalid("weights must be nonnegative"));
        }
        let total: BigRational = weights.iter().fold(BigRational::zero(), |a, w| a + w);
        if total.is_zero() {
            return Err(invalid("all weights are zero"));
        }
        let log_weights = weights
            .iter()
            .map(|w| {
                if w.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    ln_big(w.numer().magnitude()) - ln_big(w.denom().magnitude())
                }
            })
            .collect();
        let exact: Vec<BigRational> = weights.iter().map(|w| w / &total).collect();
        let probs = exact.iter().map(to_f64).collect();
        Ok(DiscreteDist {
            lo,
            log_weights,
            probs,
            exact: Some(exact),
        })
    }

    pub fn dirac(at: u64) -> Self {
        DiscreteDist {
            lo: at,
            log_weights: vec![0.0],
            probs: vec![1.0],
            exact: Some(vec![BigRational::from_integer(1.into())]),
        }
    }

    /// Inclusive support bounds.
    pub fn support(&self) -> (u64, u64) {
        (self.lo, self.lo + self.probs.len() as u64 - 1)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn exact_probs(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn is_dirac(&self) -> bool {
        self.probs.len() == 1
    }

    pub fn pmf(&self, y: u64) -> f64 {
        let (lo, hi) = self.support();
        if y < lo || y > hi {
            0.0
        } else {
            self.probs[(y - lo) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.lo + i as u64, p))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(y, p)| y as f64 * p).sum()
    }

    /// Variance as a central second moment.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.iter()
            .map(|(y, p)| {
                let d = y as f64 - mean;
                d * d * p
            })
            .sum()
    }

    /// Smallest support point of maximal probability.
    pub fn mode(&self) -> u64 {
        let mut best = 0;
        for (i, w) in self.log_weights.iter().enumerate() {
            if *w > self.log_weights[best] {
                best = i;
            }
        }
        self.lo + best as u64
    }

    /// `P(Y >= y)`.
    pub fn survival(&self, y: u64) -> f64 {
        let (lo, hi) = self.support();
        if y <= lo {
            return 1.0;
        }
        if y > hi {
            return 0.0;
        }
        self.probs[(y - lo) as usize..].iter().sum()
    }

    /// Cumulative probabilities `P(Y <= lo + i)`, last entry pinned to 1.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }

    /// Half the L1 distance between the probability vectors.
    pub fn tv_distance(&self, other: &DiscreteDist) -> f64 {
        let lo = self.support().0.min(other.support().0);
        let hi = self.support().1.max(other.support().1);
        0.5 * (lo..=hi)
            .map(|y| (self.pmf(y) - other.pmf(y)).abs())
            .sum::<f64>()
    }
}

impl Serialize for DiscreteDist {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (lo, hi) = self.support();
        let mut s = serializer.serialize_struct("DiscreteDist", 3)?;
        s.serialize_field("support", &[lo, hi])?;
        s.serialize_field("probs", &self.probs)?;
        s.serialize_field("log_weights", &self.log_weights)?;
        s.end()
    }
}
