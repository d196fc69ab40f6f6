//! Learning-rate schedules.

use std::fmt::Debug;

use super::registry::Registry;
use crate::error::{Error, Result};
use crate::mixing::MixingModel;

pub trait LearningRate: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    /// Step size for update t (1-based).
    fn eta(&self, t: u64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl LearningRate for Constant {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn eta(&self, _t: u64) -> f64 {
        self.0
    }
}

/// c / sqrt(t)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvSqrt(pub f64);

impl LearningRate for InvSqrt {
    fn name(&self) -> &'static str {
        "inv_sqrt"
    }

    fn eta(&self, t: u64) -> f64 {
        self.0 / (t.max(1) as f64).sqrt()
    }
}

/// Constant rate c * sqrt(B / (T * sum_{j<=B} phi(j))). The mixing sum is
/// floored at 1 so independent data gets c * sqrt(B / T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryMiniBatch {
    eta: f64,
}

impl TheoryMiniBatch {
    pub fn new(c: f64, horizon: u64, batch: usize, model: &MixingModel) -> Result<Self> {
        if horizon == 0 || batch == 0 {
            return Err(Error::param("horizon and batch size must be positive"));
        }
        let s = model.tail_sum(0, batch as u64)?.max(1.0);
        let eta = c * (batch as f64 / (horizon as f64 * s)).sqrt();
        check_positive(eta)?;
        Ok(Self { eta })
    }

    pub fn value(&self) -> f64 {
        self.eta
    }
}

impl LearningRate for TheoryMiniBatch {
    fn name(&self) -> &'static str {
        "theory"
    }

    fn eta(&self, _t: u64) -> f64 {
        self.eta
    }
}

fn check_positive(eta: f64) -> Result<f64> {
    if eta.is_finite() && eta > 0.0 {
        Ok(eta)
    } else {
        Err(Error::param(format!("learning rate must be positive and finite, got {eta}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrParams {
    pub lr: f64,
    pub n_iters: u64,
    pub batch: usize,
    pub model: MixingModel,
}

pub type LrFactory = fn(&LrParams) -> Result<Box<dyn LearningRate>>;

pub fn schedule_registry() -> Registry<LrFactory> {
    let mut reg: Registry<LrFactory> = Registry::new();
    reg.register("constant", |p| Ok(Box::new(Constant(check_positive(p.lr)?))))
        .register("inv_sqrt", |p| Ok(Box::new(InvSqrt(check_positive(p.lr)?))))
        .register("theory", |p| {
            Ok(Box::new(TheoryMiniBatch::new(p.lr, p.n_iters, p.batch, &p.model)?))
        });
    reg
}

pub fn build_schedule(name: &str, params: &LrParams) -> Result<Box<dyn LearningRate>> {
    let reg = schedule_registry();
    let f = reg
        .get(name)
        .ok_or_else(|| Error::param(format!("unknown lr schedule `{name}` (known: {})", reg.names().join(", "))))?;
    f(params)
}
