//! Projected SGD driver and trajectory records.

use std::fmt::Write as _;

use serde::Serialize;

use super::schedule::LearningRate;
use super::scheme::Scheme;
use crate::error::{Error, Result};
use crate::mixing::Stream;
use crate::objective::{dist, QuadraticProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// keep every `record_stride`-th row (the last step is always kept)
    pub record_stride: usize,
    /// retain iterates, averaged iterates and per-step batch statistics
    pub keep_path: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            record_stride: 1,
            keep_path: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: u64,
    pub samples_consumed: u64,
    /// f(w(t+1)), the population loss after update t
    pub pop_loss: f64,
    pub step_norm: f64,
    pub regret_running: f64,
}

/// Per-step batch data: mean sample and within-batch spread
/// (1/B) sum (xi - mean)^T A (xi - mean).
#[derive(Debug, Clone, PartialEq)]
pub struct StepData {
    pub batch_mean: Vec<f64>,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scheme: String,
    pub n_iters: u64,
    pub samples_per_step: u64,
    pub rows: Vec<TrajectoryRow>,
    /// F(w(t); x_t), batch-averaged, for every step
    pub per_step_loss: Vec<f64>,
    /// ||w(t+1) - w(t)|| for every step
    pub step_norms: Vec<f64>,
    pub etas: Vec<f64>,
    /// w(1) .. w(n+1), when the path is kept
    pub iterates: Option<Vec<Vec<f64>>>,
    /// averaged[k] = mean of w(1) .. w(k+1), when the path is kept
    pub averaged: Option<Vec<Vec<f64>>>,
    pub steps: Option<Vec<StepData>>,
    pub final_iterate: Vec<f64>,
    /// mean of w(1) .. w(n)
    pub averaged_iterate: Vec<f64>,
    /// comparator used for `regret_running`
    pub comparator: Option<Vec<f64>>,
}

impl Trajectory {
    pub const CSV_HEADER: &'static str = "t,samples_consumed,pop_loss,step_norm,regret_running";

    pub fn samples_consumed(&self, t: u64) -> u64 {
        t * self.samples_per_step
    }

    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.regret_running)
    }

    pub fn final_pop_loss(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.pop_loss)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", Self::CSV_HEADER);
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.t, r.samples_consumed, r.pop_loss, r.step_norm, r.regret_running
            );
        }
        out
    }
}

/// Runs `n_iters` projected updates, keeping the full path.
pub fn run(
    problem: &QuadraticProblem,
    stream: &mut dyn Stream,
    scheme: &dyn Scheme,
    schedule: &dyn LearningRate,
    n_iters: u64,
) -> Result<Trajectory> {
    run_with(problem, stream, scheme, schedule, n_iters, &RunOptions::default())
}

pub fn run_with(
    problem: &QuadraticProblem,
    stream: &mut dyn Stream,
    scheme: &dyn Scheme,
    schedule: &dyn LearningRate,
    n_iters: u64,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let d = problem.dim();
    if stream.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: stream.dim(),
        });
    }
    if n_iters == 0 {
        return Err(Error::param("n_iters must be at least 1"));
    }
    if opts.record_stride == 0 {
        return Err(Error::param("record_stride must be at least 1"));
    }
    let b = scheme.batch_size();
    let spp = scheme.samples_per_step() as u64;
    let comparator = problem.minimizer().ok().map(|(w, _)| w);
    let has_moments = problem.stationary_moments().is_ok();

    let mut w = problem.init_point().to_vec();
    let mut w_next = vec![0.0; d];
    let mut batch = vec![0.0; b * d];
    let mut scratch = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut g_sum = vec![0.0; d];
    let mut mean = vec![0.0; d];
    let mut w_sum = vec![0.0; d];

    let n = n_iters as usize;
    let mut rows = Vec::with_capacity(n / opts.record_stride + 1);
    let mut per_step_loss = Vec::with_capacity(n);
    let mut step_norms = Vec::with_capacity(n);
    let mut etas = Vec::with_capacity(n);
    let mut iterates = opts.keep_path.then(|| {
        let mut v = Vec::with_capacity(n + 1);
        v.push(w.clone());
        v
    });
    let mut averaged = opts.keep_path.then(|| {
        let mut v = Vec::with_capacity(n + 1);
        v.push(w.clone());
        v
    });
    let mut steps = opts.keep_path.then(|| Vec::with_capacity(n));
    let mut regret = 0.0;

    for t in 1..=n_iters {
        scheme.draw(stream, &mut batch, &mut scratch);
        g_sum.iter_mut().for_each(|v| *v = 0.0);
        let mut loss = 0.0;
        let mut cmp_loss = 0.0;
        for xi in batch.chunks(d) {
            loss += problem.quad_form_diff(&w, xi);
            if let Some(ws) = &comparator {
                cmp_loss += problem.quad_form_diff(ws, xi);
            }
            problem.grad_into(&w, xi, &mut g);
            for (s, v) in g_sum.iter_mut().zip(&g) {
                *s += v;
            }
        }
        let bf = b as f64;
        loss /= bf;
        cmp_loss /= bf;
        if g_sum.iter().any(|v| !v.is_finite()) || !loss.is_finite() {
            return Err(Error::Numerical(format!("non-finite gradient at step {t}")));
        }
        let eta = schedule.eta(t);
        for i in 0..d {
            w_next[i] = w[i] - eta * (g_sum[i] / bf);
        }
        problem.project_in_place(&mut w_next);
        if w_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite iterate at step {t}")));
        }
        let step = dist(&w_next, &w);
        if comparator.is_some() {
            regret += loss - cmp_loss;
        }
        if let Some(steps) = steps.as_mut() {
            mean.iter_mut().for_each(|v| *v = 0.0);
            for xi in batch.chunks(d) {
                for (m, v) in mean.iter_mut().zip(xi) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|v| *v /= bf);
            let spread = batch.chunks(d).map(|xi| problem.quad_form_diff(xi, &mean)).sum::<f64>() / bf;
            steps.push(StepData {
                batch_mean: mean.clone(),
                spread,
            });
        }
        for (s, v) in w_sum.iter_mut().zip(&w) {
            *s += v;
        }
        per_step_loss.push(loss);
        step_norms.push(step);
        etas.push(eta);
        std::mem::swap(&mut w, &mut w_next);
        if let Some(it) = iterates.as_mut() {
            it.push(w.clone());
        }
        if let Some(av) = averaged.as_mut() {
            let k = (t + 1) as f64;
            av.push(w_sum.iter().zip(&w).map(|(s, v)| (s + v) / k).collect());
        }
        if t % opts.record_stride as u64 == 0 || t == n_iters {
            let pop = if has_moments {
                problem.population_loss(&w)?
            } else {
                f64::NAN
            };
            rows.push(TrajectoryRow {
                t,
                samples_consumed: t * spp,
                pop_loss: pop,
                step_norm: step,
                regret_running: if comparator.is_some() { regret } else { f64::NAN },
            });
        }
    }
    let averaged_iterate = w_sum.iter().map(|s| s / n_iters as f64).collect();
    Ok(Trajectory {
        scheme: scheme.label(),
        n_iters,
        samples_per_step: spp,
        rows,
        per_step_loss,
        step_norms,
        etas,
        iterates,
        averaged,
        steps,
        final_iterate: w,
        averaged_iterate,
        comparator,
    })
}

/// Regret against `w_star` on the data each update actually used.
pub fn regret(traj: &Trajectory, problem: &QuadraticProblem, w_star: &[f64]) -> Result<f64> {
    if w_star.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: w_star.len(),
        });
    }
    if let Some(steps) = &traj.steps {
        return Ok(traj
            .per_step_loss
            .iter()
            .zip(steps)
            .map(|(loss, s)| loss - (problem.quad_form_diff(w_star, &s.batch_mean) + s.spread))
            .sum());
    }
    match &traj.comparator {
        Some(c) if c.as_slice() == w_star => Ok(traj.final_regret()),
        _ => Err(Error::MissingStepData),
    }
}
