//! Evaluators for the convergence, bias, regret and concentration bounds,
//! and the sample-complexity table.

pub mod complexity;
pub mod concentration;
pub mod convergence;
pub mod params;

pub use complexity::{complexity_order, complexity_table, ComplexityOrder, Regime, SchemeKind};
pub use concentration::{azuma_rhs, azuma_threshold, bernstein_rhs};
pub use convergence::{
    bias_bound, minibatch_bound_explicit, regret_bound, sgd_bound, subsampled_bound, suggested_lr,
    variance_bound, MiniBatchBoundTerms, RegretBoundTerms, SgdBoundTerms,
};
pub use params::BoundParams;
