//! Posterior distributions of the initial population and the offspring
//! parameter: the finite-horizon joint posterior and its large-horizon limit.

mod dist;
mod joint;
mod limit;
mod prior;
mod quad;

pub use dist::DiscreteDist;
pub use joint::{joint_posterior, JointPosterior, MAX_EVALUATIONS, REL_TOL};
pub use limit::{
    limit_mode, limit_moments, limit_posterior, limit_posterior_exact, limit_posterior_u,
    naive_ratio, naive_ratio_exact, standardized_mgf, stochastic_leq, upper_half, LimitMoments,
};
pub use prior::{
    jeffreys_pi_n, ln_jeffreys_pi_n, ln_marginal_x0_weight, marginal_x0_weight, LambdaPrior,
    PriorSpec,
};
