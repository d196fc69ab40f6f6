//! Sample-complexity orders by scheme and mixing regime.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Plain,
    Subsampled,
    MiniBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Geometric,
    FastAlgebraic,
    SlowAlgebraic,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Plain, SchemeKind::Subsampled, SchemeKind::MiniBatch];
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Geometric, Regime::FastAlgebraic, Regime::SlowAlgebraic];

    /// Regime of a mixing model; `None` for independent or tabulated data.
    pub fn of(model: &crate::mixing::MixingModel) -> Option<(Regime, f64)> {
        use crate::mixing::MixingModel as M;
        match model {
            M::Geometric { theta } => Some((Regime::Geometric, *theta)),
            M::Algebraic { theta } if *theta >= 1.0 => Some((Regime::FastAlgebraic, *theta)),
            M::Algebraic { theta } => Some((Regime::SlowAlgebraic, *theta)),
            _ => None,
        }
    }
}

/// Sample complexity eps^{-(a + b/theta)} (log 1/eps)^{c/theta}, possibly
/// up to log factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityOrder {
    pub scheme: SchemeKind,
    pub regime: Regime,
    pub theta: f64,
    /// exponent of eps, negative
    pub eps_exp: f64,
    /// exponent of log(1/eps)
    pub log_exp: f64,
    /// hides logarithmic factors
    pub tilde: bool,
    /// eps exponent as -(a + b/theta)
    pub eps_const: u32,
    pub eps_per_theta: u32,
    /// log exponent as c/theta
    pub log_per_theta: u32,
    pub symbol: String,
}

impl fmt::Display for ComplexityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)
    }
}

pub fn complexity_order(scheme: SchemeKind, regime: Regime, theta: f64) -> Result<ComplexityOrder> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::param("theta must be positive"));
    }
    match regime {
        Regime::SlowAlgebraic if theta >= 1.0 => {
            return Err(Error::param("slow algebraic mixing needs theta < 1"));
        }
        Regime::FastAlgebraic if theta < 1.0 => {
            return Err(Error::param("fast algebraic mixing needs theta >= 1"));
        }
        _ => {}
    }
    use Regime::*;
    use SchemeKind::*;
    // (eps const, eps per theta, log per theta, tilde)
    let (a, b, c, tilde) = match (scheme, regime) {
        (Plain, Geometric) => (2, 0, 2, false),
        (Plain, _) => (2, 2, 0, false),
        (Subsampled, Geometric) => (2, 0, 1, false),
        (Subsampled, _) => (2, 1, 0, false),
        (MiniBatch, Geometric) => (2, 0, 0, false),
        (MiniBatch, FastAlgebraic) => (2, 0, 0, true),
        (MiniBatch, SlowAlgebraic) => (1, 1, 0, false),
    };
    Ok(ComplexityOrder {
        scheme,
        regime,
        theta,
        eps_exp: -(a as f64 + b as f64 / theta),
        log_exp: c as f64 / theta,
        tilde,
        eps_const: a,
        eps_per_theta: b,
        log_per_theta: c,
        symbol: symbol(a, b, c, tilde),
    })
}

fn symbol(a: u32, b: u32, c: u32, tilde: bool) -> String {
    let o = if tilde { "Õ" } else { "O" };
    let eps = if b == 0 {
        format!("ε^{{−{a}}}")
    } else {
        format!("ε^{{−{a}−{b}/θ}}")
    };
    let log = if c == 0 {
        String::new()
    } else {
        format!("(log ε^{{−1}})^{{{c}/θ}}")
    };
    format!("{o}({eps}{log})")
}

/// All nine entries, rows by regime, columns by scheme.
pub fn complexity_table(theta_geometric: f64, theta_fast: f64, theta_slow: f64) -> Result<Vec<ComplexityOrder>> {
    let mut out = Vec::with_capacity(9);
    for (regime, theta) in [
        (Regime::Geometric, theta_geometric),
        (Regime::FastAlgebraic, theta_fast),
        (Regime::SlowAlgebraic, theta_slow),
    ] {
        for scheme in SchemeKind::ALL {
            out.push(complexity_order(scheme, regime, theta)?);
        }
    }
    Ok(out)
}
