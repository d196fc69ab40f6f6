//! Online SGD over phi-mixing data streams: stream generators, the quadratic
//! test problem, plain/subsampled/mini-batch SGD, bound evaluators and an
//! experiment harness.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod kv;
pub mod mixing;
pub mod objective;
pub mod optim;
pub mod rng;

pub use error::{Error, Result};
