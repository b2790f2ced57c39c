//! Combinatorial primitives in exact and log-space arithmetic, and the
//! coefficient engine for `(1 - 4 r z (1 + z))^(-lambda)`.

mod coef;
pub mod exact;
mod logreal;
mod scalars;
mod special;

pub use coef::{c_lambda, c_lambda_table, CoefTable};
pub use exact::{binomial, BigNat};
pub use logreal::{log_sum_exp, log_sum_exp_ln, LogReal};
pub use scalars::{gamma_of_r, m_of_r, r_scalars, rho, rho_inverse, sigma2_of_r, ScalarBundle};
pub use special::{d_lambda, ln_binomial, ln_d_lambda};
