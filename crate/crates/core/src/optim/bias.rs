//! Dependence-induced bias of the batch-averaged loss.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mixing::make_stream;
use crate::objective::ProblemBundle;
use crate::rng::derive_seed;

pub const MIN_BIAS_REPLICATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasEstimate {
    /// |mean - f(w)|
    pub estimate: f64,
    pub stderr: f64,
    /// Monte-Carlo mean of F(w; x_tau) given the conditioning prefix
    pub mean_loss: f64,
    pub population_loss: f64,
    pub n_mc: usize,
}

/// Estimates |E[F(w; x_tau) | conditioning] - f(w)|.
///
/// The conditioning point is the stream's reference state, optionally
/// followed by a fixed `prefix_len`-sample prefix shared by all replicates.
/// The batch x_tau holds the samples at lags tau*B + 1 ..= tau*B + B after
/// that point.
pub fn estimate_bias(
    bundle: &ProblemBundle,
    w: &[f64],
    tau: u64,
    batch: usize,
    prefix_len: u64,
    n_mc: usize,
) -> Result<BiasEstimate> {
    if n_mc < MIN_BIAS_REPLICATES {
        return Err(Error::InsufficientReplicates {
            need: MIN_BIAS_REPLICATES,
            got: n_mc,
        });
    }
    if batch == 0 {
        return Err(Error::param("batch size must be at least 1"));
    }
    let p = &bundle.problem;
    let f = p.population_loss(w)?;
    let spec = &bundle.stream;
    let proto = make_stream(spec)?;
    let d = p.dim();
    let skip = tau * batch as u64;
    let prefix_seed = derive_seed(spec.seed, &[u64::MAX]);

    let losses: Vec<f64> = (0..n_mc)
        .into_par_iter()
        .map(|i| {
            let mut s = proto.box_clone();
            let mut x = vec![0.0; d];
            let seed = derive_seed(spec.seed, &[i as u64]);
            if prefix_len == 0 {
                s.reseed(seed);
                s.reset_to_reference();
            } else {
                s.reseed(prefix_seed);
                s.reset_to_reference();
                for _ in 0..prefix_len {
                    s.next_into(&mut x);
                }
                s.reseed(seed);
            }
            for _ in 0..skip {
                s.next_into(&mut x);
            }
            let mut acc = 0.0;
            for _ in 0..batch {
                s.next_into(&mut x);
                acc += p.quad_form_diff(w, &x);
            }
            acc / batch as f64
        })
        .collect();

    let n = n_mc as f64;
    let mean = losses.iter().sum::<f64>() / n;
    let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !mean.is_finite() {
        return Err(Error::Numerical("non-finite loss in bias estimation".into()));
    }
    Ok(BiasEstimate {
        estimate: (mean - f).abs(),
        stderr: (var / n).sqrt(),
        mean_loss: mean,
        population_loss: f,
        n_mc,
    })
}

/// Exact E[F(w; x_tau) | reference state] for finite-chain streams:
/// (1/B) sum_i P^{tau B + i}(s_ref, .) . F(w; e(.)), with lags scaled by any
/// subsampling period.
pub fn exact_conditional_loss(bundle: &ProblemBundle, w: &[f64], tau: u64, batch: usize) -> Result<f64> {
    let chain = bundle
        .stream
        .kind
        .finite_chain()
        .ok_or_else(|| Error::param("exact conditional loss needs a finite-chain stream"))?;
    if batch == 0 {
        return Err(Error::param("batch size must be at least 1"));
    }
    let p = &bundle.problem;
    let period = bundle.stream.kind.period() as u64;
    let losses: Vec<f64> = chain.emission.iter().map(|e| p.quad_form_diff(w, e)).collect();
    let s0 = chain.reference_state;
    let mut total = 0.0;
    for i in 1..=batch as u64 {
        let pk = chain.transition.power(period * (tau * batch as u64 + i));
        total += (0..losses.len()).map(|y| pk[(s0, y)] * losses[y]).sum::<f64>();
    }
    Ok(total / batch as f64)
}
