use serde::Serialize;

use crate::error::{Error, Result};
use crate::kv::Section;
use crate::mixing::MixingModel;

/// Problem, algorithm and confidence constants shared by the bound evaluators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundParams {
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: u64,
    #[serde(rename = "B")]
    pub batch: u64,
    pub tau: u64,
    pub delta: f64,
    pub d: u64,
    pub eta: f64,
    pub model: MixingModel,
    pub kappa_sum: f64,
    pub regret_value: f64,
    pub w1_dist_sq: f64,
    /// observed sum of f(w(t)) - f(w*) for the trailing regret term
    pub loss_sum: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            g: 1.0,
            r: 1.0,
            l: 1.0,
            n: 1000,
            batch: 1,
            tau: 1,
            delta: 0.05,
            d: 1,
            eta: 0.01,
            model: MixingModel::Iid,
            kappa_sum: 0.0,
            regret_value: 0.0,
            w1_dist_sq: 1.0,
            loss_sum: 0.0,
        }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("G", self.g), ("R", self.r), ("eta", self.eta)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("L", self.l),
            ("kappa_sum", self.kappa_sum),
            ("regret", self.regret_value),
            ("w1_dist_sq", self.w1_dist_sq),
            ("loss_sum", self.loss_sum),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.n == 0 || self.batch == 0 || self.tau == 0 || self.d == 0 {
            return Err(Error::param("n, B, tau and d must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    /// Reads a `[bounds]` block; keys missing from the block keep the values
    /// in `base`.
    pub fn from_section(s: &Section, base: &BoundParams) -> Result<Self> {
        let p = BoundParams {
            g: s.parse_or("G", base.g)?,
            r: s.parse_or("R", base.r)?,
            l: s.parse_or("L", base.l)?,
            n: s.parse_or("n", base.n)?,
            batch: s.parse_or("B", base.batch)?,
            tau: s.parse_or("tau", base.tau)?,
            delta: s.parse_or("delta", base.delta)?,
            d: s.parse_or("d", base.d)?,
            eta: s.parse_or("eta", base.eta)?,
            model: s.parse_or("model", base.model.clone())?,
            kappa_sum: s.parse_or("kappa_sum", base.kappa_sum)?,
            regret_value: s.parse_or("regret", base.regret_value)?,
            w1_dist_sq: s.parse_or("w1_dist_sq", base.w1_dist_sq)?,
            loss_sum: s.parse_or("loss_sum", base.loss_sum)?,
        };
        p.validate().map_err(|e| s.err("", e))?;
        Ok(p)
    }

    pub(crate) fn s_b(&self) -> f64 {
        self.model.tail_sum(0, self.batch).unwrap_or(0.0)
    }

    pub(crate) fn phi(&self, k: u64) -> f64 {
        self.model.eval(k.max(1)).unwrap_or(0.0)
    }
}
