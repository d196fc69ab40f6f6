//! Online SGD schemes over dependent streams.

pub mod bias;
pub mod config;
pub mod registry;
pub mod run;
pub mod schedule;
pub mod scheme;

pub use bias::{estimate_bias, exact_conditional_loss, BiasEstimate};
pub use config::RunConfig;
pub use registry::Registry;
pub use run::{regret, run, run_with, RunOptions, StepData, Trajectory, TrajectoryRow};
pub use schedule::{build_schedule, schedule_registry, Constant, InvSqrt, LearningRate, LrParams, TheoryMiniBatch};
pub use scheme::{build_scheme, scheme_registry, MiniBatch, Plain, Scheme, SchemeParams, Subsampled};
