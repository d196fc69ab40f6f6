//! Sampling schemes: how many raw samples one update consumes and which of
//! them enter the gradient.

use std::fmt::Debug;

use super::registry::Registry;
use crate::error::{Error, Result};
use crate::mixing::Stream;

pub trait Scheme: Send + Sync + Debug {
    /// Registry name.
    fn name(&self) -> &'static str;

    /// Name with parameters, e.g. `minibatch(B=100)`.
    fn label(&self) -> String;

    /// Raw samples drawn from the stream per update.
    fn samples_per_step(&self) -> usize;

    /// Samples whose gradients are averaged per update.
    fn batch_size(&self) -> usize;

    /// Draws one update's samples. `batch` receives `batch_size` rows of
    /// width `dim`; `scratch` holds one row for discarded samples.
    fn draw(&self, stream: &mut dyn Stream, batch: &mut [f64], scratch: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plain;

impl Scheme for Plain {
    fn name(&self) -> &'static str {
        "plain"
    }

    fn label(&self) -> String {
        "plain".into()
    }

    fn samples_per_step(&self) -> usize {
        1
    }

    fn batch_size(&self) -> usize {
        1
    }

    fn draw(&self, stream: &mut dyn Stream, batch: &mut [f64], _scratch: &mut [f64]) {
        stream.next_into(batch);
    }
}

/// Uses the first sample of every block of `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subsampled {
    pub r: usize,
}

impl Subsampled {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::param("subsampling period must be at least 1"));
        }
        Ok(Self { r })
    }
}

impl Scheme for Subsampled {
    fn name(&self) -> &'static str {
        "subsampled"
    }

    fn label(&self) -> String {
        format!("subsampled(r={})", self.r)
    }

    fn samples_per_step(&self) -> usize {
        self.r
    }

    fn batch_size(&self) -> usize {
        1
    }

    fn draw(&self, stream: &mut dyn Stream, batch: &mut [f64], scratch: &mut [f64]) {
        stream.next_into(batch);
        for _ in 1..self.r {
            stream.next_into(scratch);
        }
    }
}

/// Averages `b` consecutive samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiniBatch {
    pub b: usize,
}

impl MiniBatch {
    pub fn new(b: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::param("batch size must be at least 1"));
        }
        Ok(Self { b })
    }
}

impl Scheme for MiniBatch {
    fn name(&self) -> &'static str {
        "minibatch"
    }

    fn label(&self) -> String {
        format!("minibatch(B={})", self.b)
    }

    fn samples_per_step(&self) -> usize {
        self.b
    }

    fn batch_size(&self) -> usize {
        self.b
    }

    fn draw(&self, stream: &mut dyn Stream, batch: &mut [f64], _scratch: &mut [f64]) {
        let d = stream.dim();
        for row in batch.chunks_mut(d) {
            stream.next_into(row);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeParams {
    pub r: usize,
    pub batch: usize,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self { r: 1, batch: 1 }
    }
}

pub type SchemeFactory = fn(&SchemeParams) -> Result<Box<dyn Scheme>>;

pub fn scheme_registry() -> Registry<SchemeFactory> {
    let mut reg: Registry<SchemeFactory> = Registry::new();
    reg.register("plain", |_| Ok(Box::new(Plain)))
        .register("subsampled", |p| Ok(Box::new(Subsampled::new(p.r)?)))
        .register("minibatch", |p| Ok(Box::new(MiniBatch::new(p.batch)?)));
    reg
}

pub fn build_scheme(name: &str, params: &SchemeParams) -> Result<Box<dyn Scheme>> {
    let reg = scheme_registry();
    let f = reg
        .get(name)
        .ok_or_else(|| Error::param(format!("unknown scheme `{name}` (known: {})", reg.names().join(", "))))?;
    f(params)
}
