//! Seeded dependent data streams.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use super::chain::{exact_phi_curve, TransitionMatrix};
use super::holdtime::HoldTimeLaw;
use super::model::{MixingModel, TailRule};
use crate::error::{Error, Result};
use crate::kv::Section;
use crate::rng::{rng_from_seed, SimRng};

pub const DEFAULT_MAX_HOLD: usize = 10_000;

/// A stateful, seeded generator of samples xi_1, xi_2, ...
///
/// Streams are single-owner. `box_clone` snapshots the full internal state
/// (generator included) so Monte-Carlo code can branch continuations.
pub trait Stream: Send + Sync {
    fn dim(&self) -> usize;

    /// Advances the underlying process by one emitted sample and writes it.
    fn next_into(&mut self, out: &mut [f64]);

    fn next_sample(&mut self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.next_into(&mut v);
        v
    }

    /// Replaces the random generator, keeping the process state.
    fn reseed(&mut self, seed: u64);

    /// Reseeds and redraws the initial state from the stationary law.
    /// Equivalent to rebuilding the stream from its spec with `seed`.
    fn restart(&mut self, seed: u64);

    /// Puts the process into its designated reference state: the most recent
    /// sample is the reference sample and nothing about the future is fixed
    /// beyond what that state implies.
    fn reset_to_reference(&mut self);

    /// Latent state of the most recently emitted sample, for chains whose
    /// state space is finite.
    fn state_label(&self) -> Option<usize> {
        None
    }

    fn box_clone(&self) -> Box<dyn Stream>;
}

impl Clone for Box<dyn Stream> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

/// Finite-state chain with per-state emission vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChainSpec {
    pub transition: TransitionMatrix,
    /// one row per state
    pub emission: Vec<Vec<f64>>,
    pub reference_state: usize,
}

impl FiniteChainSpec {
    pub fn new(transition: TransitionMatrix, emission: Vec<Vec<f64>>) -> Result<Self> {
        let n = transition.n_states();
        if emission.len() != n {
            return Err(Error::param(format!(
                "emission has {} rows but the chain has {n} states",
                emission.len()
            )));
        }
        let d = emission[0].len();
        if d == 0 || emission.iter().any(|e| e.len() != d) {
            return Err(Error::param("emission rows must share one positive dimension"));
        }
        Ok(Self {
            transition,
            emission,
            reference_state: 0,
        })
    }

    pub fn with_reference_state(mut self, s: usize) -> Result<Self> {
        if s >= self.transition.n_states() {
            return Err(Error::param(format!("reference state {s} out of range")));
        }
        self.reference_state = s;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.emission[0].len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StreamKind {
    IidUniform { d: usize },
    HoldTimeUniform { d: usize, alpha: f64, max_hold: usize },
    FiniteChain(FiniteChainSpec),
    Wrapped { inner: Box<StreamKind>, period: usize },
}

impl StreamKind {
    pub fn dim(&self) -> usize {
        match self {
            StreamKind::IidUniform { d } | StreamKind::HoldTimeUniform { d, .. } => *d,
            StreamKind::FiniteChain(c) => c.dim(),
            StreamKind::Wrapped { inner, .. } => inner.dim(),
        }
    }

    /// Stationary marginal is uniform on [0,1]^d.
    pub fn has_uniform_marginal(&self) -> bool {
        match self {
            StreamKind::IidUniform { .. } | StreamKind::HoldTimeUniform { .. } => true,
            StreamKind::FiniteChain(_) => false,
            StreamKind::Wrapped { inner, .. } => inner.has_uniform_marginal(),
        }
    }

    pub fn finite_chain(&self) -> Option<&FiniteChainSpec> {
        match self {
            StreamKind::FiniteChain(c) => Some(c),
            StreamKind::Wrapped { inner, .. } => inner.finite_chain(),
            _ => None,
        }
    }

    /// Total subsampling period applied on top of the base process.
    pub fn period(&self) -> usize {
        match self {
            StreamKind::Wrapped { inner, period } => period * inner.period(),
            _ => 1,
        }
    }

    pub fn base(&self) -> &StreamKind {
        match self {
            StreamKind::Wrapped { inner, .. } => inner.base(),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    pub kind: StreamKind,
    pub seed: u64,
}

impl StreamSpec {
    pub fn iid_uniform(d: usize, seed: u64) -> Self {
        Self {
            kind: StreamKind::IidUniform { d },
            seed,
        }
    }

    pub fn hold_time(d: usize, alpha: f64, max_hold: usize, seed: u64) -> Self {
        Self {
            kind: StreamKind::HoldTimeUniform { d, alpha, max_hold },
            seed,
        }
    }

    /// Hold-time stream whose stationary decay exponent is calibrated to 1/mix_rate.
    pub fn hold_time_for_rate(d: usize, mix_rate: f64, max_hold: usize, seed: u64) -> Result<Self> {
        let law = HoldTimeLaw::for_mix_rate(mix_rate, max_hold)?;
        Ok(Self::hold_time(d, law.alpha(), max_hold, seed))
    }

    pub fn finite_chain(chain: FiniteChainSpec, seed: u64) -> Self {
        Self {
            kind: StreamKind::FiniteChain(chain),
            seed,
        }
    }

    pub fn wrapped(self, period: usize) -> Self {
        Self {
            kind: StreamKind::Wrapped {
                inner: Box::new(self.kind),
                period,
            },
            seed: self.seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            kind: self.kind.clone(),
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn validate(&self) -> Result<()> {
        validate_kind(&self.kind)
    }

    /// The mixing model this stream is designed to follow, used for
    /// learning-rate and bound defaults. Finite chains report their exact
    /// coefficients tabulated up to `lags`.
    pub fn nominal_model(&self) -> Result<MixingModel> {
        nominal(&self.kind)
    }

    pub fn to_section(&self) -> Section {
        let mut s = Section::new("stream");
        let (base, period) = match &self.kind {
            StreamKind::Wrapped { .. } => (self.kind.base(), self.kind.period()),
            k => (k, 1),
        };
        match base {
            StreamKind::IidUniform { d } => {
                s.insert("kind", "iid_uniform");
                s.insert("d", d);
            }
            StreamKind::HoldTimeUniform { d, alpha, max_hold } => {
                s.insert("kind", "hold_time_uniform");
                s.insert("d", d);
                s.insert("alpha", alpha);
                s.insert("max_hold", max_hold);
            }
            StreamKind::FiniteChain(c) => {
                let n = c.transition.n_states();
                s.insert("kind", "finite_chain");
                s.insert("states", n);
                let m = c.transition.matrix();
                let mut flat = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        flat.push(m[(i, j)].to_string());
                    }
                }
                s.insert("transition", flat.join(","));
                s.insert("emission_dim", c.dim());
                let em: Vec<String> = c.emission.iter().flatten().map(|v| v.to_string()).collect();
                s.insert("emission", em.join(","));
                s.insert("reference_state", c.reference_state);
            }
            StreamKind::Wrapped { .. } => unreachable!("base() strips wrappers"),
        }
        if period > 1 {
            s.insert("subsample_period", period);
        }
        s.insert("seed", self.seed);
        s
    }

    pub fn to_config_block(&self) -> String {
        self.to_section().render()
    }

    pub fn from_section(s: &Section) -> Result<Self> {
        let kind_name = s.require("kind")?;
        let seed: u64 = s.parse_or("seed", 0)?;
        let mut kind = match kind_name {
            "iid_uniform" | "iid" => StreamKind::IidUniform { d: s.parse_req("d")? },
            "hold_time_uniform" | "hold_time" => {
                let d = s.parse_req("d")?;
                let max_hold = s.parse_or("max_hold", DEFAULT_MAX_HOLD)?;
                let alpha = match (s.parse_opt::<f64>("alpha")?, s.parse_opt::<f64>("mix_rate")?) {
                    (Some(a), None) => a,
                    (None, Some(r)) => HoldTimeLaw::for_mix_rate(r, max_hold)
                        .map_err(|e| s.err("mix_rate", e))?
                        .alpha(),
                    (Some(_), Some(_)) => return Err(s.err("alpha", "give either alpha or mix_rate, not both")),
                    (None, None) => return Err(s.err("alpha", "hold_time_uniform needs alpha or mix_rate")),
                };
                StreamKind::HoldTimeUniform { d, alpha, max_hold }
            }
            "finite_chain" => {
                let flat: Vec<f64> = s.list("transition")?.ok_or_else(|| s.err("transition", "missing"))?;
                let n = match s.parse_opt::<usize>("states")? {
                    Some(n) => n,
                    None => {
                        let n = (flat.len() as f64).sqrt().round() as usize;
                        if n * n != flat.len() {
                            return Err(s.err("transition", "entry count is not a perfect square"));
                        }
                        n
                    }
                };
                let transition =
                    TransitionMatrix::from_row_major(n, &flat).map_err(|e| s.err("transition", e))?;
                let emission = match s.list::<f64>("emission")? {
                    None => (0..n).map(|i| vec![i as f64]).collect(),
                    Some(vals) => {
                        let d = s.parse_or("emission_dim", vals.len() / n.max(1))?;
                        if d == 0 || vals.len() != n * d {
                            return Err(s.err("emission", format!("expected {n} x {d} values")));
                        }
                        vals.chunks(d).map(|c| c.to_vec()).collect()
                    }
                };
                let chain = FiniteChainSpec::new(transition, emission)
                    .and_then(|c| c.with_reference_state(s.parse_or("reference_state", 0)?))
                    .map_err(|e| s.err("emission", e))?;
                StreamKind::FiniteChain(chain)
            }
            other => return Err(s.err("kind", format!("unknown stream kind `{other}`"))),
        };
        let period: usize = s.parse_or("subsample_period", 1)?;
        if period == 0 {
            return Err(s.err("subsample_period", "must be at least 1"));
        }
        if period > 1 {
            kind = StreamKind::Wrapped {
                inner: Box::new(kind),
                period,
            };
        }
        let spec = StreamSpec { kind, seed };
        spec.validate().map_err(|e| s.err("kind", e))?;
        Ok(spec)
    }

    pub fn from_config_block(text: &str) -> Result<Self> {
        let sections = crate::kv::parse_sections(text)?;
        let s = sections
            .iter()
            .find(|s| s.name == "stream")
            .ok_or_else(|| Error::config("no [stream] section"))?;
        Self::from_section(s)
    }
}

fn validate_kind(kind: &StreamKind) -> Result<()> {
    match kind {
        StreamKind::IidUniform { d } => {
            if *d == 0 {
                return Err(Error::param("stream dimension must be positive"));
            }
        }
        StreamKind::HoldTimeUniform { d, alpha, max_hold } => {
            if *d == 0 {
                return Err(Error::param("stream dimension must be positive"));
            }
            if *max_hold < 1 {
                return Err(Error::param("max_hold must be at least 1"));
            }
            if !(alpha.is_finite() && *alpha > 1.0) {
                return Err(Error::param(format!("hold-time tail exponent must exceed 1, got {alpha}")));
            }
        }
        StreamKind::FiniteChain(c) => {
            if c.reference_state >= c.transition.n_states() {
                return Err(Error::param("reference state out of range"));
            }
        }
        StreamKind::Wrapped { inner, period } => {
            if *period == 0 {
                return Err(Error::param("subsample period must be at least 1"));
            }
            validate_kind(inner)?;
        }
    }
    Ok(())
}

const NOMINAL_TABLE_LAGS: u64 = 4096;

fn nominal(kind: &StreamKind) -> Result<MixingModel> {
    match kind {
        StreamKind::IidUniform { .. } => Ok(MixingModel::Iid),
        StreamKind::HoldTimeUniform { alpha, max_hold, .. } => {
            let law = HoldTimeLaw::new(*alpha, *max_hold)?;
            MixingModel::algebraic(law.fitted_decay())
        }
        StreamKind::FiniteChain(c) => {
            let curve = exact_phi_curve(&c.transition, NOMINAL_TABLE_LAGS)?;
            MixingModel::tabulated(curve, TailRule::Zero)
        }
        StreamKind::Wrapped { inner, period } => match nominal(inner)? {
            MixingModel::Iid => Ok(MixingModel::Iid),
            MixingModel::Geometric { theta } => {
                // exp(-(r k)^theta) is geometric in k with a scaled exponent
                // only when theta = 1; tabulate otherwise
                tabulate(&MixingModel::Geometric { theta }, *period as u64)
            }
            m => tabulate(&m, *period as u64),
        },
    }
}

fn tabulate(model: &MixingModel, period: u64) -> Result<MixingModel> {
    let values: Vec<f64> = (1..=NOMINAL_TABLE_LAGS / period.max(1))
        .map(|k| model.eval_unchecked(k * period))
        .collect();
    MixingModel::tabulated(values, TailRule::Zero)
}

/// Builds the generator for a spec.
pub fn make_stream(spec: &StreamSpec) -> Result<Box<dyn Stream>> {
    spec.validate()?;
    build(&spec.kind, spec.seed)
}

fn build(kind: &StreamKind, seed: u64) -> Result<Box<dyn Stream>> {
    let rng = rng_from_seed(seed);
    let mut stream: Box<dyn Stream> = match kind {
        StreamKind::IidUniform { d } => Box::new(IidUniformStream { d: *d, rng }),
        StreamKind::HoldTimeUniform { d, alpha, max_hold } => Box::new(HoldTimeStream {
            law: Arc::new(HoldTimeLaw::new(*alpha, *max_hold)?),
            value: vec![0.0; *d],
            left: 0,
            rng,
        }),
        StreamKind::FiniteChain(c) => {
            let mu = c.transition.stationary()?;
            Box::new(FiniteChainStream {
                cdf: Arc::new(row_cdfs(c.transition.matrix())),
                init_cdf: Arc::new(cumulative(&mu)),
                emission: Arc::new(c.emission.clone()),
                reference: c.reference_state,
                state: 0,
                rng,
            })
        }
        StreamKind::Wrapped { inner, period } => Box::new(WrappedStream {
            inner: build(inner, seed)?,
            period: *period,
        }),
    };
    stream.restart(seed);
    Ok(stream)
}

fn cumulative(w: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = w
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

fn row_cdfs(p: &DMatrix<f64>) -> Vec<Vec<f64>> {
    p.row_iter()
        .map(|r| cumulative(&r.iter().copied().collect::<Vec<_>>()))
        .collect()
}

fn sample_index(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

#[derive(Clone)]
struct IidUniformStream {
    d: usize,
    rng: SimRng,
}

impl Stream for IidUniformStream {
    fn dim(&self) -> usize {
        self.d
    }

    fn next_into(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.rng.gen::<f64>();
        }
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = rng_from_seed(seed);
    }

    fn restart(&mut self, seed: u64) {
        self.reseed(seed);
    }

    fn reset_to_reference(&mut self) {}

    fn box_clone(&self) -> Box<dyn Stream> {
        Box::new(self.clone())
    }
}

/// Renewal stream: holds a uniform draw for a heavy-tailed number of steps.
#[derive(Clone)]
struct HoldTimeStream {
    law: Arc<HoldTimeLaw>,
    value: Vec<f64>,
    // samples still to be emitted from the current hold
    left: usize,
    rng: SimRng,
}

impl Stream for HoldTimeStream {
    fn dim(&self) -> usize {
        self.value.len()
    }

    fn next_into(&mut self, out: &mut [f64]) {
        if self.left == 0 {
            for v in self.value.iter_mut() {
                *v = self.rng.gen::<f64>();
            }
            self.left = self.law.sample_hold(&mut self.rng);
        }
        self.left -= 1;
        out.copy_from_slice(&self.value);
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = rng_from_seed(seed);
    }

    /// Starts inside a hold whose remaining length follows the stationary
    /// residual law, so no burn-in is needed.
    fn restart(&mut self, seed: u64) {
        self.reseed(seed);
        for v in self.value.iter_mut() {
            *v = self.rng.gen::<f64>();
        }
        self.left = self.law.sample_residual(&mut self.rng);
    }

    /// Fresh renewal whose first sample is the origin: the reference sample
    /// counts as emitted and the rest of its hold is drawn from the hold law.
    fn reset_to_reference(&mut self) {
        self.value.iter_mut().for_each(|v| *v = 0.0);
        self.left = self.law.sample_hold(&mut self.rng) - 1;
    }

    fn box_clone(&self) -> Box<dyn Stream> {
        Box::new(self.clone())
    }
}

#[derive(Clone)]
struct FiniteChainStream {
    cdf: Arc<Vec<Vec<f64>>>,
    init_cdf: Arc<Vec<f64>>,
    emission: Arc<Vec<Vec<f64>>>,
    reference: usize,
    state: usize,
    rng: SimRng,
}

impl Stream for FiniteChainStream {
    fn dim(&self) -> usize {
        self.emission[0].len()
    }

    fn next_into(&mut self, out: &mut [f64]) {
        let u = self.rng.gen::<f64>();
        self.state = sample_index(&self.cdf[self.state], u);
        out.copy_from_slice(&self.emission[self.state]);
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = rng_from_seed(seed);
    }

    fn restart(&mut self, seed: u64) {
        self.reseed(seed);
        let u = self.rng.gen::<f64>();
        self.state = sample_index(&self.init_cdf, u);
    }

    fn reset_to_reference(&mut self) {
        self.state = self.reference;
    }

    fn state_label(&self) -> Option<usize> {
        Some(self.state)
    }

    fn box_clone(&self) -> Box<dyn Stream> {
        Box::new(self.clone())
    }
}

/// Keeps one sample out of every `period`: advances the inner process
/// `period` steps and emits the last.
struct WrappedStream {
    inner: Box<dyn Stream>,
    period: usize,
}

impl Stream for WrappedStream {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn next_into(&mut self, out: &mut [f64]) {
        for _ in 0..self.period {
            self.inner.next_into(out);
        }
    }

    fn reseed(&mut self, seed: u64) {
        self.inner.reseed(seed);
    }

    fn restart(&mut self, seed: u64) {
        self.inner.restart(seed);
    }

    fn reset_to_reference(&mut self) {
        self.inner.reset_to_reference();
    }

    fn state_label(&self) -> Option<usize> {
        self.inner.state_label()
    }

    fn box_clone(&self) -> Box<dyn Stream> {
        Box::new(WrappedStream {
            inner: self.inner.box_clone(),
            period: self.period,
        })
    }
}

/// Parses a row-major comma list into rows of width `cols`.
#[cfg(test)]
mod tests {
    use super::*;

    fn chain_spec() -> StreamSpec {
        let t = TransitionMatrix::from_row_major(3, &[0.5, 0.3, 0.2, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4]).unwrap();
        let c = FiniteChainSpec::new(t, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.25]]).unwrap();
        StreamSpec::finite_chain(c, 11)
    }

    #[test]
    fn iid_samples_in_unit_cube() {
        let mut s = make_stream(&StreamSpec::iid_uniform(2, 5)).unwrap();
        for _ in 0..1000 {
            let x = s.next_sample();
            assert_eq!(x.len(), 2);
            assert!(x.iter().all(|v| (0.0..1.0).contains(v)));
        }
    }

    #[test]
    fn period_one_wrapper_is_identity() {
        for spec in [StreamSpec::hold_time(3, 1.5, 100, 9), chain_spec()] {
            let mut a = make_stream(&spec).unwrap();
            let mut b = make_stream(&spec.clone().wrapped(1)).unwrap();
            for _ in 0..500 {
                assert_eq!(a.next_sample(), b.next_sample());
            }
        }
    }

    #[test]
    fn wrapper_keeps_every_rth_sample() {
        let spec = StreamSpec::hold_time(2, 1.5, 50, 4);
        let mut raw = make_stream(&spec).unwrap();
        let mut sub = make_stream(&spec.clone().wrapped(3)).unwrap();
        for _ in 0..200 {
            let mut last = vec![];
            for _ in 0..3 {
                last = raw.next_sample();
            }
            assert_eq!(sub.next_sample(), last);
        }
    }

    #[test]
    fn absorbing_single_state_emits_constant() {
        let t = TransitionMatrix::from_row_major(1, &[1.0]).unwrap();
        let c = FiniteChainSpec::new(t, vec![vec![0.3, -2.0]]).unwrap();
        let mut s = make_stream(&StreamSpec::finite_chain(c, 1)).unwrap();
        for _ in 0..100 {
            assert_eq!(s.next_sample(), vec![0.3, -2.0]);
        }
    }

    #[test]
    fn equal_specs_equal_sequences() {
        for spec in [
            StreamSpec::iid_uniform(4, 77),
            StreamSpec::hold_time(4, 1.4, 10_000, 77),
            chain_spec(),
            chain_spec().wrapped(5),
        ] {
            let mut a = make_stream(&spec).unwrap();
            let mut b = make_stream(&spec).unwrap();
            let mut xa = vec![0.0; spec.dim()];
            let mut xb = vec![0.0; spec.dim()];
            for _ in 0..1_000_000 {
                a.next_into(&mut xa);
                b.next_into(&mut xb);
                assert!(xa == xb);
            }
        }
    }

    #[test]
    fn restart_matches_rebuild() {
        for spec in [StreamSpec::hold_time(2, 1.5, 100, 1), chain_spec().wrapped(2)] {
            let mut a = make_stream(&spec).unwrap();
            for _ in 0..37 {
                a.next_sample();
            }
            a.restart(555);
            let mut b = make_stream(&spec.with_seed(555)).unwrap();
            for _ in 0..300 {
                assert_eq!(a.next_sample(), b.next_sample());
            }
        }
    }

    #[test]
    fn hold_time_reference_reset_emits_origin_until_renewal() {
        let mut s = make_stream(&StreamSpec::hold_time(3, 1.5, 1000, 2)).unwrap();
        s.reset_to_reference();
        let mut zeros_then_fresh = true;
        let mut seen_fresh = false;
        for _ in 0..2000 {
            let x = s.next_sample();
            let is_zero = x.iter().all(|v| *v == 0.0);
            if seen_fresh && is_zero {
                zeros_then_fresh = false;
            }
            if !is_zero {
                seen_fresh = true;
            }
        }
        assert!(zeros_then_fresh && seen_fresh);
    }

    #[test]
    fn hold_time_marginal_is_uniform() {
        let mut s = make_stream(&StreamSpec::hold_time(1, 2.0, 100, 8)).unwrap();
        let n = 400_000;
        let mean: f64 = (0..n).map(|_| s.next_sample()[0]).sum::<f64>() / n as f64;
        // dependent draws: loose tolerance
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn config_block_round_trip() {
        for spec in [
            StreamSpec::iid_uniform(3, 1),
            StreamSpec::hold_time(10, 1.4251, 10_000, 99),
            chain_spec(),
            chain_spec().wrapped(4),
        ] {
            let text = spec.to_config_block();
            assert_eq!(StreamSpec::from_config_block(&text).unwrap(), spec);
        }
    }

    #[test]
    fn config_errors() {
        assert!(StreamSpec::from_config_block("[stream]\nkind = finite_chain\ntransition = 0.5,0.4,0.5,0.5\n").is_err());
        assert!(StreamSpec::from_config_block("[stream]\nkind = hold_time_uniform\nd = 2\nalpha = 1.5\nmax_hold = 0\n").is_err());
        assert!(StreamSpec::from_config_block("[stream]\nkind = nope\n").is_err());
        let s = StreamSpec::from_config_block("[stream]\nkind = hold_time_uniform\nd = 2\nmix_rate = 2\n").unwrap();
        match s.kind {
            StreamKind::HoldTimeUniform { alpha, .. } => assert!(alpha > 1.3 && alpha < 1.5),
            _ => panic!(),
        }
    }

    #[test]
    fn nominal_models() {
        assert_eq!(StreamSpec::iid_uniform(1, 0).nominal_model().unwrap(), MixingModel::Iid);
        let hold = StreamSpec::hold_time_for_rate(1, 2.0, 10_000, 0).unwrap();
        match hold.nominal_model().unwrap() {
            MixingModel::Algebraic { theta } => assert!((theta - 0.5).abs() < 1e-6),
            m => panic!("{m:?}"),
        }
        let tab = chain_spec().nominal_model().unwrap();
        let t = chain_spec();
        let exact = super::super::chain::exact_phi_finite_chain(&t.kind.finite_chain().unwrap().transition, 3).unwrap();
        assert!((tab.eval(3).unwrap() - exact).abs() < 1e-12);
    }
}
