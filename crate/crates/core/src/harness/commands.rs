//! The four experiment pipelines.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::bounds::{self, BoundParams, Regime, SchemeKind};
use crate::error::{Error, Result};
use crate::mixing::{
    estimate_phi_curve, exact_phi_finite_chain, make_stream, MixingModel, PhiOptions, StreamKind, StreamSpec,
};
use crate::objective::ProblemBundle;
use crate::optim::{estimate_bias, run_with, RunConfig, RunOptions};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasRow {
    /// `None` when the stream has no tunable rate
    pub mix_rate: Option<f64>,
    pub tau: u64,
    pub batch: usize,
    pub bias: f64,
    pub stderr: f64,
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// Bias estimates over the (rate, B, tau) grid.
pub fn bias_sweep(cfg: &ExperimentConfig) -> Result<Vec<BiasRow>> {
    let sweep = &cfg.bias_sweep;
    let seed = cfg.experiment.base_seed;
    let streams: Vec<(Option<f64>, StreamSpec)> = if sweep.mix_rates.is_empty() {
        vec![(nominal_rate(&cfg.stream), cfg.stream.with_seed(seed))]
    } else {
        let (d, max_hold) = match &cfg.stream.kind {
            StreamKind::HoldTimeUniform { d, max_hold, .. } => (*d, *max_hold),
            _ => return Err(Error::config("[bias_sweep] mix_rates needs a hold_time_uniform stream")),
        };
        sweep
            .mix_rates
            .iter()
            .map(|&r| Ok((Some(r), StreamSpec::hold_time_for_rate(d, r, max_hold, seed)?)))
            .collect::<Result<_>>()?
    };
    let mut rows = Vec::new();
    for (rate, spec) in streams {
        let bundle = ProblemBundle::from_config(&cfg.problem, spec)?;
        let w = sweep.w.clone().unwrap_or_else(|| bundle.problem.init_point().to_vec());
        for &b in &sweep.batches {
            for &tau in &sweep.taus {
                let e = estimate_bias(&bundle, &w, tau, b, sweep.prefix_len, sweep.n_mc)?;
                rows.push(BiasRow {
                    mix_rate: rate,
                    tau,
                    batch: b,
                    bias: e.estimate,
                    stderr: e.stderr,
                });
            }
        }
    }
    Ok(rows)
}

fn nominal_rate(spec: &StreamSpec) -> Option<f64> {
    match &spec.kind {
        StreamKind::HoldTimeUniform { .. } => match spec.nominal_model().ok()? {
            MixingModel::Algebraic { theta } => Some(1.0 / theta),
            _ => None,
        },
        _ => None,
    }
}

pub fn cmd_bias_sweep(cfg: &ExperimentConfig) -> Result<String> {
    let mut out = String::from("mix_rate,tau,B,bias,stderr\n");
    for r in bias_sweep(cfg)? {
        let _ = writeln!(out, "{},{},{},{},{}", opt_cell(r.mix_rate), r.tau, r.batch, r.bias, r.stderr);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trial: usize,
    pub final_loss: f64,
    /// population loss at each common checkpoint
    pub curve: Vec<f64>,
    pub regret: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeCurve {
    pub name: String,
    pub samples: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub final_mean: f64,
    pub final_stderr: f64,
    /// trial mean of the loss averaged over the trailing checkpoints
    pub tail_mean: f64,
    pub tail_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareResult {
    pub curves: Vec<SchemeCurve>,
    pub trials: Vec<Vec<TrialSummary>>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Runs every `[run]` block for `n_trials` trials and aligns the loss curves
/// on common sample checkpoints.
pub fn compare(cfg: &ExperimentConfig) -> Result<CompareResult> {
    if cfg.runs.len() < 2 {
        return Err(Error::config("compare needs at least two [run] blocks"));
    }
    let bundle = cfg.bundle()?;
    let exp = &cfg.experiment;
    let model = cfg.stream.nominal_model()?;
    let plans: Vec<(&RunConfig, u64, u64)> = cfg
        .runs
        .iter()
        .map(|rc| {
            let spp = rc.build_scheme()?.samples_per_step() as u64;
            let n_iters = rc.n_iters.unwrap_or(exp.sample_budget / spp);
            if n_iters == 0 {
                return Err(Error::config(format!("sample budget is smaller than one step of {}", rc.display_name())));
            }
            Ok((rc, spp, n_iters))
        })
        .collect::<Result<_>>()?;
    let period = plans.iter().fold(1u64, |l, (_, spp, _)| l / gcd(l, *spp) * spp) * exp.record_stride;
    let budget = plans.iter().map(|(_, spp, n)| spp * n).min().unwrap_or(0);
    let n_points = budget / period;
    if n_points == 0 {
        return Err(Error::config(format!("sample budget {budget} is below the common checkpoint period {period}")));
    }
    let checkpoints: Vec<u64> = (1..=n_points).map(|k| k * period).collect();
    let tail_start = budget as f64 * (1.0 - exp.tail_fraction);

    let mut curves = Vec::with_capacity(plans.len());
    let mut all_trials = Vec::with_capacity(plans.len());
    for (rc, spp, n_iters) in plans {
        let block_seed = rc.seed.unwrap_or(exp.base_seed);
        let scheme = rc.build_scheme()?;
        let schedule = rc.build_schedule(n_iters, &model)?;
        let opts = RunOptions {
            record_stride: (period / spp) as usize,
            keep_path: false,
        };
        let trials: Vec<TrialSummary> = (0..exp.n_trials)
            .into_par_iter()
            .map(|trial| {
                let start = Instant::now();
                let mut stream = make_stream(&bundle.stream.with_seed(derive_seed(block_seed, &[trial as u64])))?;
                let tr = run_with(
                    &bundle.problem,
                    stream.as_mut(),
                    scheme.as_ref(),
                    schedule.as_ref(),
                    n_iters,
                    &opts,
                )?;
                let curve: Vec<f64> = tr
                    .rows
                    .iter()
                    .filter(|r| r.samples_consumed % period == 0 && r.samples_consumed <= budget)
                    .map(|r| r.pop_loss)
                    .collect();
                Ok(TrialSummary {
                    trial,
                    final_loss: *curve.last().unwrap_or(&f64::NAN),
                    curve,
                    regret: tr.final_regret(),
                    wall_time: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<_>>()?;
        let mut mean = Vec::with_capacity(checkpoints.len());
        let mut stderr = Vec::with_capacity(checkpoints.len());
        for k in 0..checkpoints.len() {
            let col: Vec<f64> = trials.iter().map(|t| t.curve[k]).collect();
            let (m, s) = mean_stderr(&col);
            mean.push(m);
            stderr.push(s);
        }
        let tails: Vec<f64> = trials
            .iter()
            .map(|t| {
                let v: Vec<f64> = checkpoints
                    .iter()
                    .zip(&t.curve)
                    .filter(|(s, _)| **s as f64 > tail_start)
                    .map(|(_, l)| *l)
                    .collect();
                v.iter().sum::<f64>() / v.len().max(1) as f64
            })
            .collect();
        let (tail_mean, tail_stderr) = mean_stderr(&tails);
        let finals: Vec<f64> = trials.iter().map(|t| t.final_loss).collect();
        let (final_mean, final_stderr) = mean_stderr(&finals);
        curves.push(SchemeCurve {
            name: rc.display_name(),
            samples: checkpoints.clone(),
            mean,
            stderr,
            final_mean,
            final_stderr,
            tail_mean,
            tail_stderr,
        });
        all_trials.push(trials);
    }
    Ok(CompareResult {
        curves,
        trials: all_trials,
    })
}

pub fn compare_csv(res: &CompareResult) -> String {
    let mut out = String::from("scheme,samples,mean_loss,stderr_loss\n");
    for c in &res.curves {
        for ((s, m), e) in c.samples.iter().zip(&c.mean).zip(&c.stderr) {
            let _ = writeln!(out, "{},{},{},{}", c.name, s, m, e);
        }
    }
    out
}

pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<String> {
    Ok(compare_csv(&compare(cfg)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingRow {
    pub k: u64,
    pub phi: f64,
    pub stderr: f64,
    pub model_value: f64,
    /// subsampled stream at lag k
    pub sub_phi: f64,
    pub sub_stderr: f64,
    /// base stream at lag r k
    pub phi_at_rk: f64,
    pub stderr_at_rk: f64,
}

/// Mixing coefficients of the configured stream and of its r-subsampled
/// version. Finite chains are computed exactly (stderr 0), other streams are
/// estimated.
pub fn mixing_check(cfg: &ExperimentConfig) -> Result<Vec<MixingRow>> {
    let mc = &cfg.mixing_check;
    let r = mc.subsample_period as u64;
    let spec = cfg.stream.with_seed(cfg.experiment.base_seed);
    let model = spec.nominal_model()?;
    let sub = spec.clone().wrapped(mc.subsample_period);
    let mut rows = Vec::with_capacity(mc.lags.len());
    if let StreamKind::FiniteChain(c) = &spec.kind {
        for &k in &mc.lags {
            let base = exact_phi_finite_chain(&c.transition, k)?;
            let sub_phi = crate::mixing::exact_phi_finite_chain(&c.transition.k_step(r), k)?;
            let at_rk = exact_phi_finite_chain(&c.transition, r * k)?;
            rows.push(MixingRow {
                k,
                phi: base,
                stderr: 0.0,
                model_value: model.eval(k)?,
                sub_phi,
                sub_stderr: 0.0,
                phi_at_rk: at_rk,
                stderr_at_rk: 0.0,
            });
        }
        return Ok(rows);
    }
    let opts = PhiOptions {
        bins_per_coord: mc.bins,
        ..PhiOptions::default()
    };
    let mut base_lags = mc.lags.clone();
    base_lags.extend(mc.lags.iter().map(|k| k * r));
    let base = estimate_phi_curve(&spec, &base_lags, mc.n_replicates, mc.burn_in, &opts)?;
    let subs = estimate_phi_curve(&sub, &mc.lags, mc.n_replicates, mc.burn_in, &opts)?;
    let n = mc.lags.len();
    for (i, &k) in mc.lags.iter().enumerate() {
        rows.push(MixingRow {
            k,
            phi: base[i].value,
            stderr: base[i].stderr,
            model_value: model.eval(k)?,
            sub_phi: subs[i].value,
            sub_stderr: subs[i].stderr,
            phi_at_rk: base[n + i].value,
            stderr_at_rk: base[n + i].stderr,
        });
    }
    Ok(rows)
}

pub fn cmd_mixing_check(cfg: &ExperimentConfig) -> Result<String> {
    let mut out = String::from("k,phi_exact_or_est,stderr,model_value,sub_phi_exact_or_est,sub_stderr,phi_at_rk,stderr_at_rk\n");
    for r in mixing_check(cfg)? {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k, r.phi, r.stderr, r.model_value, r.sub_phi, r.sub_stderr, r.phi_at_rk, r.stderr_at_rk
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportInputs {
    #[serde(flatten)]
    pub params: BoundParams,
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityEntry {
    pub scheme: SchemeKind,
    pub regime: Regime,
    pub theta: f64,
    pub eps_exp: f64,
    pub log_exp: f64,
    pub tilde: bool,
    pub symbol: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub inputs: ReportInputs,
    pub bias_bound: f64,
    pub sgd_bound: bounds::SgdBoundTerms,
    pub subsampled_bound: bounds::SgdBoundTerms,
    pub minibatch_bound_explicit: bounds::MiniBatchBoundTerms,
    pub regret_bound: bounds::RegretBoundTerms,
    pub suggested_lr: f64,
    pub variance_bound: f64,
    /// sample-complexity orders for the model's regime, if it has one
    pub complexity: Vec<ComplexityEntry>,
}

/// Evaluates every bound at the `[bounds]` parameters. G, R, L and d
/// default to the configured problem, the mixing model to the stream's.
pub fn bounds_report(cfg: &ExperimentConfig) -> Result<BoundReport> {
    let bundle = cfg.bundle()?;
    let c = bundle.problem.constants();
    let base = BoundParams {
        g: c.g,
        r: c.r,
        l: c.l,
        d: bundle.problem.dim() as u64,
        model: cfg.stream.nominal_model()?,
        ..BoundParams::default()
    };
    let empty = crate::kv::Section::new("bounds");
    let section = cfg.bounds.as_ref().unwrap_or(&empty);
    let p = BoundParams::from_section(section, &base)?;
    let r: u64 = section.parse_or("r", 1)?;
    if r == 0 {
        return Err(section.err("r", "must be at least 1"));
    }
    let complexity = match Regime::of(&p.model) {
        None => Vec::new(),
        Some((regime, theta)) => SchemeKind::ALL
            .iter()
            .map(|&s| {
                let o = bounds::complexity_order(s, regime, theta)?;
                Ok(ComplexityEntry {
                    scheme: o.scheme,
                    regime: o.regime,
                    theta: o.theta,
                    eps_exp: o.eps_exp,
                    log_exp: o.log_exp,
                    tilde: o.tilde,
                    symbol: o.symbol,
                })
            })
            .collect::<Result<_>>()?,
    };
    Ok(BoundReport {
        bias_bound: bounds::bias_bound(p.g, p.r, p.batch, p.tau, &p.model)?,
        sgd_bound: bounds::sgd_bound(&p)?,
        subsampled_bound: bounds::subsampled_bound(&p, r)?,
        minibatch_bound_explicit: bounds::minibatch_bound_explicit(&p)?,
        regret_bound: bounds::regret_bound(&p)?,
        suggested_lr: bounds::suggested_lr(&p)?,
        variance_bound: bounds::variance_bound(&p)?,
        complexity,
        inputs: ReportInputs { params: p, r },
    })
}

pub fn cmd_bounds_report(cfg: &ExperimentConfig) -> Result<String> {
    let report = bounds_report(cfg)?;
    let mut s = serde_json::to_string_pretty(&report).map_err(|e| Error::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
