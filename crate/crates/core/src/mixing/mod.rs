//! Mixing coefficients, dependent streams and their estimation.

pub mod chain;
pub mod estimate;
pub mod holdtime;
pub mod model;
pub mod stream;

pub use chain::{exact_phi_curve, exact_phi_finite_chain, matrix_power, TransitionMatrix};
pub use estimate::{estimate_phi_curve, estimate_phi_empirical, PhiEstimate, PhiOptions};
pub use holdtime::{loglog_slope, HoldTimeLaw};
pub use model::{MixingModel, TailRule};
pub use stream::{make_stream, FiniteChainSpec, Stream, StreamKind, StreamSpec};
