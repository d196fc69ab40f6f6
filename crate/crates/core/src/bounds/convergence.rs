//! Convergence, bias, regret and gradient-variance bounds.

use serde::Serialize;

use super::params::BoundParams;
use crate::error::{Error, Result};
use crate::mixing::MixingModel;

/// (G R / B) sum_{i=1}^{B} phi(tau B + i)
pub fn bias_bound(g: f64, r: f64, batch: u64, tau: u64, model: &MixingModel) -> Result<f64> {
    if !(g > 0.0 && r > 0.0) || batch == 0 {
        return Err(Error::param("G, R and B must be positive"));
    }
    Ok(g * r / batch as f64 * model.tail_sum(tau, batch)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SgdBoundTerms {
    pub regret_term: f64,
    pub kappa_term: f64,
    pub drift_term: f64,
    pub concentration_term: f64,
    pub mixing_term: f64,
    pub mixing_lag: u64,
    pub total: f64,
}

/// R_n/n + (tau-1) G/n sum kappa + 2(tau-1) G R/n + 2 G R sqrt((2 tau/n) log(tau/delta)) + phi(tau) G R
pub fn sgd_bound(p: &BoundParams) -> Result<SgdBoundTerms> {
    sgd_terms(p, p.tau)
}

/// `sgd_bound` with the mixing term evaluated at lag r tau.
pub fn subsampled_bound(p: &BoundParams, r: u64) -> Result<SgdBoundTerms> {
    if r == 0 {
        return Err(Error::param("subsampling period must be at least 1"));
    }
    sgd_terms(p, r * p.tau)
}

fn sgd_terms(p: &BoundParams, lag: u64) -> Result<SgdBoundTerms> {
    p.validate()?;
    let n = p.n as f64;
    let tau = p.tau as f64;
    let gr = p.g * p.r;
    let regret_term = p.regret_value / n;
    let kappa_term = (tau - 1.0) * p.g / n * p.kappa_sum;
    let drift_term = 2.0 * (tau - 1.0) * gr / n;
    let concentration_term = 2.0 * gr * ((2.0 * tau / n) * (tau / p.delta).ln()).sqrt();
    let mixing_term = p.phi(lag) * gr;
    Ok(SgdBoundTerms {
        regret_term,
        kappa_term,
        drift_term,
        concentration_term,
        mixing_term,
        mixing_lag: lag,
        total: regret_term + kappa_term + drift_term + concentration_term + mixing_term,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiniBatchBoundTerms {
    pub bias_term: f64,
    pub lambda: f64,
    pub concentration_term: f64,
    pub regret_term: f64,
    pub kappa_term: f64,
    pub drift_term: f64,
    /// bound on sum_{t<=n} f(w(t)) - f(w*)
    pub total: f64,
    /// total / n, the averaged-iterate form
    pub averaged: f64,
}

/// Explicit-constant mini-batch bound:
/// G R (n/B) sum phi(tau B + i) + sqrt((2 tau n/B) lambda log(4 tau/delta) log(4n/delta))
/// + R_n + G (tau-1) sum kappa + G R (tau-1), with
/// lambda = (2/3)(G R/B) log(4n/delta)
///   + sqrt((4/9)(G^2 R^2/B) log(4n/delta)^2 + (4 G^2 R^2 + 16 G^2 R^2 sum_{i<=B} phi(i)) log(4n/delta)).
pub fn minibatch_bound_explicit(p: &BoundParams) -> Result<MiniBatchBoundTerms> {
    p.validate()?;
    let n = p.n as f64;
    let b = p.batch as f64;
    let tau = p.tau as f64;
    let gr = p.g * p.r;
    let gr2 = gr * gr;
    let log_n = (4.0 * n / p.delta).ln();
    let lambda = (2.0 / 3.0) * (gr / b) * log_n
        + ((4.0 / 9.0) * (gr2 / b) * log_n * log_n + (4.0 * gr2 + 16.0 * gr2 * p.s_b()) * log_n).sqrt();
    let bias_term = gr * (n / b) * p.model.tail_sum(p.tau, p.batch)?;
    let concentration_term = ((2.0 * tau * n / b) * lambda * (4.0 * tau / p.delta).ln() * log_n).sqrt();
    let kappa_term = p.g * (tau - 1.0) * p.kappa_sum;
    let drift_term = gr * (tau - 1.0);
    let total = bias_term + concentration_term + p.regret_value + kappa_term + drift_term;
    Ok(MiniBatchBoundTerms {
        bias_term,
        lambda,
        concentration_term,
        regret_term: p.regret_value,
        kappa_term,
        drift_term,
        total,
        averaged: total / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretBoundTerms {
    pub init_term: f64,
    pub variance_term: f64,
    pub loss_term: f64,
    pub total: f64,
}

fn regret_bracket(p: &BoundParams) -> f64 {
    let g2 = p.g * p.g;
    let b = p.batch as f64;
    let s = p.s_b();
    let t = p.n as f64;
    ((268.0 / 3.0) * g2 + 256.0 * g2 * s) * (2.0 * p.d as f64 * t / p.delta).ln() / b + 2.0 * g2 * (s / b).powi(2)
}

/// ||w1 - w*||^2/(2 eta) + eta T [((268/3) G^2 + 256 G^2 S_B) log(2dT/delta)/B + 2 G^2 (S_B/B)^2]
/// + 2 eta L loss_sum, with T = n and S_B = sum_{j<=B} phi(j).
pub fn regret_bound(p: &BoundParams) -> Result<RegretBoundTerms> {
    p.validate()?;
    let init_term = p.w1_dist_sq / (2.0 * p.eta);
    let variance_term = p.eta * p.n as f64 * regret_bracket(p);
    let loss_term = 2.0 * p.eta * p.l * p.loss_sum;
    Ok(RegretBoundTerms {
        init_term,
        variance_term,
        loss_term,
        total: init_term + variance_term + loss_term,
    })
}

/// Step size equating the first two regret terms.
pub fn suggested_lr(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let eta = ((p.w1_dist_sq / 2.0) / (p.n as f64 * regret_bracket(p))).sqrt();
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::param("suggested rate is degenerate (w1_dist_sq must be positive)"));
    }
    Ok(eta)
}

/// [(268/3) G^2 + 256 G^2 S_B] log(2d/delta)/B + 2 G^2 (S_B/B)^2
pub fn variance_bound(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let g2 = p.g * p.g;
    let b = p.batch as f64;
    let s = p.s_b();
    Ok(((268.0 / 3.0) * g2 + 256.0 * g2 * s) * (2.0 * p.d as f64 / p.delta).ln() / b + 2.0 * g2 * (s / b).powi(2))
}
