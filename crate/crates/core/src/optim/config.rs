//! `[run]` blocks.

use super::schedule::{build_schedule, LearningRate, LrParams};
use super::scheme::{build_scheme, Scheme, SchemeParams};
use crate::error::Result;
use crate::kv::Section;
use crate::mixing::MixingModel;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub label: Option<String>,
    pub scheme: String,
    pub r: usize,
    pub batch: usize,
    pub lr: f64,
    pub lr_schedule: String,
    /// updates; when absent the harness derives it from its sample budget
    pub n_iters: Option<u64>,
    pub seed: Option<u64>,
    pub record_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            label: None,
            scheme: "plain".into(),
            r: 1,
            batch: 1,
            lr: 0.01,
            lr_schedule: "constant".into(),
            n_iters: None,
            seed: None,
            record_stride: 1,
        }
    }
}

impl RunConfig {
    pub fn from_section(s: &Section) -> Result<Self> {
        let d = Self::default();
        let cfg = Self {
            label: s.get("label").map(str::to_string),
            scheme: s.get("scheme").unwrap_or(&d.scheme).to_string(),
            r: s.parse_or("r", d.r)?,
            batch: s.parse_or("B", d.batch)?,
            lr: s.parse_or("lr", d.lr)?,
            lr_schedule: s.get("lr_schedule").unwrap_or(&d.lr_schedule).to_string(),
            n_iters: s.parse_opt("n_iters")?,
            seed: s.parse_opt("seed")?,
            record_stride: s.parse_or("record_stride", d.record_stride)?,
        };
        cfg.scheme_params_check().map_err(|e| s.err("scheme", e))?;
        if cfg.record_stride == 0 {
            return Err(s.err("record_stride", "must be at least 1"));
        }
        if cfg.n_iters == Some(0) {
            return Err(s.err("n_iters", "must be at least 1"));
        }
        if !(cfg.lr.is_finite() && cfg.lr > 0.0) {
            return Err(s.err("lr", "must be positive"));
        }
        if super::schedule::schedule_registry().get(&cfg.lr_schedule).is_none() {
            return Err(s.err("lr_schedule", format!("unknown schedule `{}`", cfg.lr_schedule)));
        }
        Ok(cfg)
    }

    fn scheme_params_check(&self) -> Result<()> {
        self.build_scheme().map(|_| ())
    }

    pub fn to_section(&self) -> Section {
        let mut s = Section::new("run");
        if let Some(l) = &self.label {
            s.insert("label", l);
        }
        s.insert("scheme", &self.scheme);
        s.insert("r", self.r);
        s.insert("B", self.batch);
        s.insert("lr", self.lr);
        s.insert("lr_schedule", &self.lr_schedule);
        if let Some(n) = self.n_iters {
            s.insert("n_iters", n);
        }
        if let Some(seed) = self.seed {
            s.insert("seed", seed);
        }
        s.insert("record_stride", self.record_stride);
        s
    }

    pub fn build_scheme(&self) -> Result<Box<dyn Scheme>> {
        build_scheme(
            &self.scheme,
            &SchemeParams {
                r: self.r,
                batch: self.batch,
            },
        )
    }

    pub fn build_schedule(&self, n_iters: u64, model: &MixingModel) -> Result<Box<dyn LearningRate>> {
        build_schedule(
            &self.lr_schedule,
            &LrParams {
                lr: self.lr,
                n_iters,
                batch: self.batch,
                model: model.clone(),
            },
        )
    }

    pub fn display_name(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => self.build_scheme().map(|s| s.label()).unwrap_or_else(|_| self.scheme.clone()),
        }
    }
}
