//! Approximate Bayesian computation by rejection sampling, together with the
//! tooling needed to study how its error trades off against compute.
//!
//! * [`sampler`] runs the basic rejection algorithm over any [`ModelSpec`],
//!   with a whitened acceptance norm and seeded, scheduling-independent
//!   randomness.
//! * [`toy`] is a bivariate Gaussian model where every quantity of interest
//!   (posterior, acceptance probability, bias constant, optimal tolerance
//!   constant) has a closed form or a deterministic quadrature oracle.
//! * [`analysis`] estimates bias and mean squared error over tolerance grids,
//!   fits `MSE(δ) = a·δ^(-q) + b·δ^4`, and regresses optimal tolerances and
//!   errors against cost on log-log axes.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod sampler;
pub mod toy;

pub use error::{AbcError, Result};
pub use sampler::{
    abc_rejection, derive_replicate_seed, posterior_estimate, run_cost, whitening_transform,
    AbcConfig, AbcRng, AbcRun, AcceptanceNorm, CostModel, Dims, FnModel, ModelSpec, StopRule,
    Whitened,
};
