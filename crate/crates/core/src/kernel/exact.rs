//! Exact integer and rational arithmetic.
//!
//! Used for small populations (`x <= 30` or so), where the weights of the
//! limit posterior can be written down exactly and compared against the
//! floating point log-space routes.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type BigNat = BigUint;

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigNat {
    if k < 0 || k as u64 > n {
        return BigNat::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigNat::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Natural log of a positive big integer, via its top 64 bits.
pub fn ln_big(n: &BigNat) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn nat(n: BigNat) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow(r: &BigRational, k: u64) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= r;
    }
    acc
}

/// Weights `C(2y, y) C(y, x - y) r^y` of `nu(r, x)` for `y = h(x)..=x`.
pub fn nu_weights(r: &BigRational, x: u64) -> Vec<BigRational> {
    let lo = x.div_ceil(2);
    (lo..=x)
        .map(|y| nat(binomial(2 * y, y as i64) * binomial(y, (x - y) as i64)) * pow(r, y))
        .collect()
}

/// Weights `C(y, x - y) 4^y r^y` of the hitting-time measure for `y = h(x)..=x`.
pub fn nu_eta_weights(r: &BigRational, x: u64) -> Vec<BigRational> {
    let lo = x.div_ceil(2);
    let four_r = r * BigRational::from_integer(BigInt::from(4));
    (lo..=x)
        .map(|y| nat(binomial(y, (x - y) as i64)) * pow(&four_r, y))
        .collect()
}

/// Total mass of `nu(r, x)` as the direct double-binomial sum.
pub fn b_direct(r: &BigRational, x: u64) -> BigRational {
    nu_weights(r, x)
        .into_iter()
        .fold(BigRational::zero(), |acc, w| acc + w)
}

/// Coefficients of `(1 - 4 r z (1 + z))^(-lambda)` for `x = 0..=x_max`.
///
/// Uses the three-term recurrence obtained by differentiating the generating
/// function, `x c_x = 4r (x - 1 + lambda) c_{x-1} + 4r (x - 2 + 2 lambda) c_{x-2}`,
/// which involves no irrational quantity.
pub fn c_lambda_table(lambda: &BigRational, r: &BigRational, x_max: u64) -> Vec<BigRational> {
    let four_r = r * BigRational::from_integer(BigInt::from(4));
    let two = BigRational::from_integer(BigInt::from(2));
    let mut c = Vec::with_capacity(x_max as usize + 1);
    c.push(BigRational::one());
    for x in 1..=x_max {
        let xr = BigRational::from_integer(BigInt::from(x));
        let prev = &c[(x - 1) as usize];
        let mut next = &four_r * (&xr - BigRational::one() + lambda) * prev;
        if x >= 2 {
            let prev2 = &c[(x - 2) as usize];
            next += &four_r * (&xr - &two + &two * lambda) * prev2;
        }
        c.push(next / xr);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pascal(n: usize) -> Vec<Vec<BigNat>> {
        let mut rows: Vec<Vec<BigNat>> = vec![vec![BigNat::one()]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![BigNat::one(); i + 1];
            for k in 1..i {
                row[k] = &prev[k - 1] + &prev[k];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(4, 2), BigNat::from(6u32));
        assert_eq!(binomial(6, 3), BigNat::from(20u32));
        for n in 0..40 {
            assert_eq!(binomial(n, 0), BigNat::one());
        }
        assert!(binomial(5, -1).is_zero());
        assert!(binomial(5, 6).is_zero());
    }

    #[test]
    fn matches_pascal_triangle() {
        let rows = pascal(60);
        for (n, row) in rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                assert_eq!(&binomial(n as u64, k as i64), v);
            }
        }
    }

    #[test]
    fn no_overflow_for_large_n() {
        let b = binomial(1000, 500);
        assert!(b.bits() > 990);
        assert_eq!(b * 500u32, binomial(999, 499) * 1000u32);
    }

    #[test]
    fn ln_big_matches_f64_log() {
        let b = binomial(200, 100);
        let direct = crate::kernel::special::ln_binomial(200, 100);
        assert!((ln_big(&b) - direct).abs() < 1e-10);
        assert_eq!(ln_big(&BigNat::from(1u32)), 0.0);
    }

    #[test]
    fn recurrence_reproduces_low_order_coefficients() {
        let r = rational(1, 1);
        let c = c_lambda_table(&rational(1, 2), &r, 2);
        assert_eq!(c[0], rational(1, 1));
        assert_eq!(c[1], rational(2, 1));
        assert_eq!(c[2], rational(8, 1));

        let r = rational(1, 8);
        let c = c_lambda_table(&rational(1, 1), &r, 2);
        assert_eq!(c[2], rational(3, 4));
    }

    #[test]
    fn half_power_equals_double_sum() {
        for r in [
            rational(1, 8),
            rational(1, 3),
            rational(1, 1),
            rational(4, 1),
        ] {
            let c = c_lambda_table(&rational(1, 2), &r, 30);
            for x in 0..=30u64 {
                assert_eq!(c[x as usize], b_direct(&r, x), "x = {x}");
            }
        }
    }
}
