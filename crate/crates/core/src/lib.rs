//! Bayesian and hitting-time estimation of the initial population and the
//! offspring parameter of binary Galton-Watson branching processes.
//!
//! Each individual is replaced by one or two children, with probabilities
//! `1 - u` and `u`. The crate computes
//!
//! - the finite-horizon joint posterior of `(X_0, U)` under Jeffreys priors
//!   ([`posterior::joint_posterior`]),
//! - its large-horizon limit `mu(r, x)` with `r = rho(u)`
//!   ([`posterior::limit_posterior`]) together with moments, modes and the
//!   standardized moment generating function,
//! - the hitting-time estimator `eta_x` ([`hitting`]),
//! - seeded Monte Carlo checks of the limit theorems ([`montecarlo`]).
//!
//! Weights are carried in log space ([`kernel::LogReal`]); small cases can be
//! evaluated in exact rational arithmetic ([`kernel::exact`]) and serve as
//! oracles for the floating point routes.

pub mod branching;
mod error;
pub mod hitting;
pub mod kernel;
pub mod montecarlo;
pub mod posterior;

pub use error::{Error, Result};
