use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// How a tabulated mixing sequence continues past its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    LastHeld,
    Zero,
}

/// A mixing-coefficient function phi(k), k >= 1.
///
/// Coefficients use the unnormalized L1 convention, so values live in `[0, 2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixingModel {
    /// phi(k) = exp(-k^theta)
    Geometric { theta: f64 },
    /// phi(k) = k^(-theta)
    Algebraic { theta: f64 },
    Tabulated { values: Vec<f64>, tail: TailRule },
    Iid,
}

impl MixingModel {
    pub fn geometric(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(MixingModel::Geometric { theta })
    }

    pub fn algebraic(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(MixingModel::Algebraic { theta })
    }

    pub fn tabulated(values: Vec<f64>, tail: TailRule) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("tabulated mixing model needs at least one value"));
        }
        for (i, v) in values.iter().enumerate() {
            if !(0.0..=2.0).contains(v) {
                return Err(Error::param(format!("tabulated phi({}) = {v} outside [0, 2]", i + 1)));
            }
            if i > 0 && *v > values[i - 1] {
                return Err(Error::param(format!(
                    "tabulated phi must be non-increasing (phi({}) > phi({}))",
                    i + 1,
                    i
                )));
            }
        }
        Ok(MixingModel::Tabulated { values, tail })
    }

    /// phi(k). Rejects k = 0.
    pub fn eval(&self, k: u64) -> Result<f64> {
        if k == 0 {
            return Err(Error::param("mixing lag must be positive"));
        }
        Ok(self.eval_unchecked(k))
    }

    pub(crate) fn eval_unchecked(&self, k: u64) -> f64 {
        let kf = k as f64;
        match self {
            MixingModel::Geometric { theta } => (-kf.powf(*theta)).exp(),
            MixingModel::Algebraic { theta } => kf.powf(-*theta),
            MixingModel::Tabulated { values, tail } => match values.get(k as usize - 1) {
                Some(v) => *v,
                None => match tail {
                    TailRule::LastHeld => *values.last().expect("non-empty"),
                    TailRule::Zero => 0.0,
                },
            },
            MixingModel::Iid => 0.0,
        }
    }

    /// sum_{i=1}^{block} phi(tau * block + i). With `tau = 0` this is the
    /// plain partial sum sum_{i<=block} phi(i).
    pub fn tail_sum(&self, tau: u64, block: u64) -> Result<f64> {
        if block == 0 {
            return Err(Error::param("block length B must be at least 1"));
        }
        let offset = tau
            .checked_mul(block)
            .ok_or_else(|| Error::param("tau * B overflows"))?;
        Ok((1..=block).map(|i| self.eval_unchecked(offset + i)).sum())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("mixing rate theta must be positive, got {theta}")))
    }
}

impl fmt::Display for MixingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixingModel::Geometric { theta } => write!(f, "geometric:{theta}"),
            MixingModel::Algebraic { theta } => write!(f, "algebraic:{theta}"),
            MixingModel::Iid => write!(f, "iid"),
            MixingModel::Tabulated { values, tail } => {
                let vals: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                let tail = match tail {
                    TailRule::LastHeld => "last",
                    TailRule::Zero => "zero",
                };
                write!(f, "tabulated:{};{tail}", vals.join(","))
            }
        }
    }
}

/// Parses `iid`, `geometric:<theta>`, `algebraic:<theta>` or
/// `tabulated:<v1>,<v2>,...[;last|;zero]`.
impl FromStr for MixingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        let theta = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::config(format!("mixing model `{kind}` needs a rate")))?
                .parse::<f64>()
                .map_err(|e| Error::config(format!("bad mixing rate in `{s}`: {e}")))
        };
        match kind.to_ascii_lowercase().as_str() {
            "iid" => Ok(MixingModel::Iid),
            "geometric" => MixingModel::geometric(theta(arg)?),
            "algebraic" => MixingModel::algebraic(theta(arg)?),
            "tabulated" => {
                let arg = arg.ok_or_else(|| Error::config("tabulated model needs values"))?;
                let (vals, tail) = match arg.split_once(';') {
                    Some((v, t)) => (v, t.trim()),
                    None => (arg, "last"),
                };
                let tail = match tail {
                    "last" => TailRule::LastHeld,
                    "zero" => TailRule::Zero,
                    other => return Err(Error::config(format!("unknown tail rule `{other}`"))),
                };
                let values = vals
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::config(format!("bad tabulated value `{v}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                MixingModel::tabulated(values, tail)
            }
            other => Err(Error::config(format!("unknown mixing model `{other}`"))),
        }
    }
}
