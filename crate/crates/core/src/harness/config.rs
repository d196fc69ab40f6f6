//! Experiment configuration files.

use crate::error::{Error, Result};
use crate::kv::{parse_sections, Section};
use crate::mixing::stream::DEFAULT_MAX_HOLD;
use crate::mixing::StreamSpec;
use crate::objective::{ProblemBundle, ProblemConfig};
use crate::optim::RunConfig;

const SECTIONS: [&str; 7] = ["problem", "stream", "run", "bias_sweep", "mixing_check", "bounds", "experiment"];

fn doubling(max: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |k| Some(k * 2)).take_while(|k| *k <= max).collect()
}

/// `[experiment]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub n_trials: usize,
    pub base_seed: u64,
    /// raw samples per trial for run blocks without `n_iters`
    pub sample_budget: u64,
    /// checkpoint spacing in units of the common sample period
    pub record_stride: u64,
    /// share of the budget averaged for the tail-window loss
    pub tail_fraction: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            n_trials: 100,
            base_seed: 0,
            sample_budget: 100_000,
            record_stride: 1,
            tail_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSweepConfig {
    /// hold-time streams are recalibrated to each rate; empty keeps the stream
    pub mix_rates: Vec<f64>,
    pub taus: Vec<u64>,
    pub batches: Vec<usize>,
    pub n_mc: usize,
    pub prefix_len: u64,
    /// evaluation point; defaults to the problem's initial point
    pub w: Option<Vec<f64>>,
}

impl Default for BiasSweepConfig {
    fn default() -> Self {
        Self {
            mix_rates: Vec::new(),
            taus: doubling(128),
            batches: vec![1],
            n_mc: 10_000,
            prefix_len: 0,
            w: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingCheckConfig {
    pub lags: Vec<u64>,
    pub n_replicates: usize,
    pub burn_in: u64,
    /// period of the subsampled-stream columns
    pub subsample_period: usize,
    pub bins: usize,
}

impl Default for MixingCheckConfig {
    fn default() -> Self {
        Self {
            lags: doubling(512),
            n_replicates: 10_000,
            burn_in: 0,
            subsample_period: 2,
            bins: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub stream: StreamSpec,
    pub runs: Vec<RunConfig>,
    pub bias_sweep: BiasSweepConfig,
    pub mixing_check: MixingCheckConfig,
    pub bounds: Option<Section>,
    pub experiment: ExperimentSettings,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        for s in &sections {
            if !SECTIONS.contains(&s.name.as_str()) {
                return Err(Error::Config {
                    line: s.line,
                    msg: format!("unknown section [{}]", s.name),
                });
            }
            if s.name != "run" && sections.iter().filter(|t| t.name == s.name).count() > 1 {
                return Err(Error::Config {
                    line: s.line,
                    msg: format!("section [{}] given twice", s.name),
                });
            }
        }
        let find = |name: &str| sections.iter().find(|s| s.name == name);

        let experiment = match find("experiment") {
            Some(s) => parse_experiment(s)?,
            None => ExperimentSettings::default(),
        };
        let problem = match find("problem") {
            Some(s) => ProblemConfig::from_section(s)?,
            None => ProblemConfig::default_for(10),
        };
        let stream = match find("stream") {
            Some(s) => StreamSpec::from_section(s)?,
            None => StreamSpec::hold_time_for_rate(problem.d, 2.0, DEFAULT_MAX_HOLD, experiment.base_seed)?,
        };
        if stream.dim() != problem.d {
            return Err(Error::config(format!(
                "stream dimension {} does not match problem dimension {}",
                stream.dim(),
                problem.d
            )));
        }
        let runs = sections
            .iter()
            .filter(|s| s.name == "run")
            .map(RunConfig::from_section)
            .collect::<Result<Vec<_>>>()?;
        let bias_sweep = match find("bias_sweep") {
            Some(s) => parse_bias_sweep(s, problem.d)?,
            None => BiasSweepConfig::default(),
        };
        let mixing_check = match find("mixing_check") {
            Some(s) => parse_mixing_check(s)?,
            None => MixingCheckConfig::default(),
        };
        let cfg = Self {
            problem,
            stream,
            runs,
            bias_sweep,
            mixing_check,
            bounds: find("bounds").cloned(),
            experiment,
        };
        // fail early on problems the stream cannot feed
        cfg.bundle()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn bundle(&self) -> Result<ProblemBundle> {
        ProblemBundle::from_config(&self.problem, self.stream.clone()).map_err(|e| match e {
            Error::Config { .. } => e,
            other => Error::config(other.to_string()),
        })
    }

    /// Replaces the base seed, as the CLI `--seed` flag does.
    pub fn with_base_seed(mut self, seed: u64) -> Self {
        self.experiment.base_seed = seed;
        self
    }
}

fn parse_experiment(s: &Section) -> Result<ExperimentSettings> {
    let d = ExperimentSettings::default();
    let e = ExperimentSettings {
        n_trials: s.parse_or("n_trials", d.n_trials)?,
        base_seed: s.parse_or("base_seed", d.base_seed)?,
        sample_budget: s.parse_or("sample_budget", d.sample_budget)?,
        record_stride: s.parse_or("record_stride", d.record_stride)?,
        tail_fraction: s.parse_or("tail_fraction", d.tail_fraction)?,
    };
    if e.n_trials == 0 {
        return Err(s.err("n_trials", "must be at least 1"));
    }
    if e.sample_budget == 0 {
        return Err(s.err("sample_budget", "must be at least 1"));
    }
    if e.record_stride == 0 {
        return Err(s.err("record_stride", "must be at least 1"));
    }
    if !(e.tail_fraction > 0.0 && e.tail_fraction <= 1.0) {
        return Err(s.err("tail_fraction", "must lie in (0, 1]"));
    }
    Ok(e)
}

fn non_empty<T>(s: &Section, key: &str, v: Option<Vec<T>>, default: Vec<T>) -> Result<Vec<T>> {
    match v {
        None => Ok(default),
        Some(v) if v.is_empty() => Err(s.err(key, "grid must not be empty")),
        Some(v) => Ok(v),
    }
}

fn parse_bias_sweep(s: &Section, d: usize) -> Result<BiasSweepConfig> {
    let def = BiasSweepConfig::default();
    let cfg = BiasSweepConfig {
        mix_rates: s.list("mix_rates")?.unwrap_or_default(),
        taus: non_empty(s, "taus", s.list("taus")?, def.taus)?,
        batches: non_empty(s, "batches", s.list("batches")?, def.batches)?,
        n_mc: s.parse_or("n_mc", def.n_mc)?,
        prefix_len: s.parse_or("prefix_len", def.prefix_len)?,
        w: s.list("w")?,
    };
    if cfg.batches.contains(&0) {
        return Err(s.err("batches", "batch sizes must be positive"));
    }
    if cfg.mix_rates.iter().any(|r| !(*r >= 1.0)) {
        return Err(s.err("mix_rates", "rates must be at least 1"));
    }
    if let Some(w) = &cfg.w {
        if w.len() != d {
            return Err(s.err("w", format!("expected {d} values")));
        }
    }
    if cfg.n_mc < crate::optim::bias::MIN_BIAS_REPLICATES {
        return Err(s.err("n_mc", format!("must be at least {}", crate::optim::bias::MIN_BIAS_REPLICATES)));
    }
    Ok(cfg)
}

fn parse_mixing_check(s: &Section) -> Result<MixingCheckConfig> {
    let def = MixingCheckConfig::default();
    let cfg = MixingCheckConfig {
        lags: non_empty(s, "lags", s.list("lags")?, def.lags)?,
        n_replicates: s.parse_or("n_replicates", def.n_replicates)?,
        burn_in: s.parse_or("burn_in", def.burn_in)?,
        subsample_period: s.parse_or("subsample_period", def.subsample_period)?,
        bins: s.parse_or("bins", def.bins)?,
    };
    if cfg.lags.contains(&0) {
        return Err(s.err("lags", "lags must be positive"));
    }
    if cfg.subsample_period == 0 {
        return Err(s.err("subsample_period", "must be at least 1"));
    }
    if cfg.n_replicates < crate::mixing::estimate::MIN_REPLICATES {
        return Err(s.err("n_replicates", "must be at least 100"));
    }
    if cfg.bins < 2 {
        return Err(s.err("bins", "must be at least 2"));
    }
    Ok(cfg)
}
