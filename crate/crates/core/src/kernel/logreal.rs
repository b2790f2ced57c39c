use std::cmp::Ordering;
use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A nonnegative weight stored by its natural logarithm.
///
/// `-inf` represents an exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogReal(f64);

impl LogReal {
    pub const ZERO: LogReal = LogReal(f64::NEG_INFINITY);
    pub const ONE: LogReal = LogReal(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan(), "NaN log weight");
        LogReal(ln)
    }

    pub fn from_value(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(invalid(format!("weight must be nonnegative, got {value}")));
        }
        Ok(LogReal(value.ln()))
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powi(self, k: i32) -> Self {
        if self.is_zero() {
            return if k == 0 { Self::ONE } else { Self::ZERO };
        }
        LogReal(self.0 * f64::from(k))
    }
}

impl Mul for LogReal {
    type Output = LogReal;

    fn mul(self, rhs: LogReal) -> LogReal {
        if self.is_zero() || rhs.is_zero() {
            return LogReal::ZERO;
        }
        LogReal(self.0 + rhs.0)
    }
}

impl Div for LogReal {
    type Output = LogReal;

    fn div(self, rhs: LogReal) -> LogReal {
        debug_assert!(!rhs.is_zero(), "division by a zero weight");
        if self.is_zero() {
            return LogReal::ZERO;
        }
        LogReal(self.0 - rhs.0)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

/// `ln(sum(exp(v)))` over raw log values, shifted by the maximum.
pub fn log_sum_exp_ln(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Sum of weights given in log space. Exactly zero iff every input is zero.
pub fn log_sum_exp(values: &[LogReal]) -> Result<LogReal> {
    if values.is_empty() {
        return Err(Error::Empty("log_sum_exp needs at least one value"));
    }
    let raw: Vec<f64> = values.iter().map(|v| v.0).collect();
    Ok(LogReal(log_sum_exp_ln(&raw)))
}
