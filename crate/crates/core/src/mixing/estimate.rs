//! Monte-Carlo estimation of mixing coefficients.
//!
//! Replicate chains are run to a checkpoint and grouped into cells by the
//! coarse state of the checkpoint sample (the latent state for finite chains,
//! the histogram bin of the leading coordinates otherwise). Each cell's
//! conditional law at lag k is compared with the stationary histogram using a
//! cross-fitted L1 distance, and the largest cell distance is reported.

use rayon::prelude::*;
use serde::Serialize;

use super::stream::{make_stream, StreamSpec};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

pub const MIN_REPLICATES: usize = 100;
const JACKKNIFE_GROUPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiEstimate {
    pub k: u64,
    pub value: f64,
    pub stderr: f64,
    pub n_replicates: usize,
}

impl PhiEstimate {
    pub const CSV_HEADER: &'static str = "k,value,stderr,n_replicates";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.k, self.value, self.stderr, self.n_replicates)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiOptions {
    pub bins_per_coord: usize,
    /// number of leading coordinates that are binned for continuous streams
    pub binned_coords: usize,
    /// cells with fewer replicates than this are ignored
    pub min_cell: usize,
}

impl Default for PhiOptions {
    fn default() -> Self {
        Self {
            bins_per_coord: 16,
            binned_coords: 1,
            min_cell: 32,
        }
    }
}

pub fn estimate_phi_empirical(spec: &StreamSpec, k: u64, n_replicates: usize, burn_in: u64) -> Result<PhiEstimate> {
    Ok(estimate_phi_curve(spec, &[k], n_replicates, burn_in, &PhiOptions::default())?[0])
}

/// Estimates φ at each lag in `lags` from one set of replicate chains.
pub fn estimate_phi_curve(
    spec: &StreamSpec,
    lags: &[u64],
    n_replicates: usize,
    burn_in: u64,
    opts: &PhiOptions,
) -> Result<Vec<PhiEstimate>> {
    if n_replicates < MIN_REPLICATES {
        return Err(Error::InsufficientReplicates {
            need: MIN_REPLICATES,
            got: n_replicates,
        });
    }
    if lags.iter().any(|&k| k == 0) {
        return Err(Error::param("lag must be positive"));
    }
    if opts.bins_per_coord < 2 || opts.binned_coords == 0 {
        return Err(Error::param("binning needs at least 2 bins on at least one coordinate"));
    }
    spec.validate()?;
    let part = Partition::for_spec(spec, opts)?;
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    let proto = make_stream(spec)?;

    // cell of the checkpoint, then the cell at each requested lag
    let records: Vec<(usize, Vec<usize>)> = (0..n_replicates)
        .into_par_iter()
        .map(|i| {
            let mut s = proto.box_clone();
            s.restart(derive_seed(spec.seed, &[i as u64]));
            let mut x = vec![0.0; s.dim()];
            for _ in 0..burn_in {
                s.next_into(&mut x);
            }
            s.next_into(&mut x);
            let cell = part.cell(s.state_label(), &x);
            let mut at = Vec::with_capacity(lags.len());
            let mut lag = 0u64;
            let mut order: Vec<(usize, u64)> = lags.iter().copied().enumerate().collect();
            order.sort_by_key(|&(_, k)| k);
            let mut out = vec![0usize; lags.len()];
            for (slot, k) in order {
                while lag < k {
                    s.next_into(&mut x);
                    lag += 1;
                }
                out[slot] = part.cell(s.state_label(), &x);
            }
            at.extend(out);
            debug_assert!(lag <= max_lag);
            (cell, at)
        })
        .collect();

    let n_cells = part.n_cells();
    let mut cell_sizes = vec![0usize; n_cells];
    for (c, _) in &records {
        cell_sizes[*c] += 1;
    }
    let eligible: Vec<usize> = (0..n_cells).filter(|&c| cell_sizes[c] >= opts.min_cell.max(4)).collect();

    let mut out = Vec::with_capacity(lags.len());
    for (li, &k) in lags.iter().enumerate() {
        // counts[group][half][cell][bin]
        let mut counts = vec![vec![vec![vec![0u32; n_cells]; n_cells]; 2]; JACKKNIFE_GROUPS];
        for (i, (c, at)) in records.iter().enumerate() {
            counts[(i / 2) % JACKKNIFE_GROUPS][i % 2][*c][at[li]] += 1;
        }
        let mut total = vec![vec![vec![0u32; n_cells]; n_cells]; 2];
        for g in &counts {
            for h in 0..2 {
                for c in 0..n_cells {
                    for b in 0..n_cells {
                        total[h][c][b] += g[h][c][b];
                    }
                }
            }
        }
        let full = max_cell_distance(&total, &eligible, &part.reference);
        let mut loo = Vec::with_capacity(JACKKNIFE_GROUPS);
        for g in &counts {
            let mut rest = total.clone();
            for h in 0..2 {
                for c in 0..n_cells {
                    for b in 0..n_cells {
                        rest[h][c][b] -= g[h][c][b];
                    }
                }
            }
            loo.push(max_cell_distance(&rest, &eligible, &part.reference));
        }
        let gm = JACKKNIFE_GROUPS as f64;
        let mean = loo.iter().sum::<f64>() / gm;
        let var = (gm - 1.0) / gm * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        out.push(PhiEstimate {
            k,
            value: full.max(0.0),
            stderr: var.sqrt(),
            n_replicates,
        });
    }
    Ok(out)
}

/// Cross-fitted L1 distance between a cell's conditional histogram and the
/// reference, maximized over eligible cells.
fn max_cell_distance(counts: &[Vec<Vec<u32>>], eligible: &[usize], reference: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for &c in eligible {
        let na: u32 = counts[0][c].iter().sum();
        let nb: u32 = counts[1][c].iter().sum();
        if na == 0 || nb == 0 {
            continue;
        }
        let mut d = 0.0;
        for (b, q) in reference.iter().enumerate() {
            let pa = counts[0][c][b] as f64 / na as f64 - q;
            let pb = counts[1][c][b] as f64 / nb as f64 - q;
            d += 0.5 * (sign(pa) * pb + sign(pb) * pa);
        }
        best = best.max(d);
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

struct Partition {
    finite: bool,
    bins: usize,
    coords: usize,
    reference: Vec<f64>,
}

impl Partition {
    fn for_spec(spec: &StreamSpec, opts: &PhiOptions) -> Result<Self> {
        if let Some(chain) = spec.kind.finite_chain() {
            return Ok(Self {
                finite: true,
                bins: 0,
                coords: 0,
                reference: chain.transition.stationary()?,
            });
        }
        if !spec.kind.has_uniform_marginal() {
            return Err(Error::param("no stationary histogram is known for this stream"));
        }
        let coords = opts.binned_coords.min(spec.dim());
        let n = opts
            .bins_per_coord
            .checked_pow(coords as u32)
            .filter(|n| *n <= 4096)
            .ok_or_else(|| Error::param("too many histogram cells"))?;
        Ok(Self {
            finite: false,
            bins: opts.bins_per_coord,
            coords,
            reference: vec![1.0 / n as f64; n],
        })
    }

    fn n_cells(&self) -> usize {
        self.reference.len()
    }

    fn cell(&self, label: Option<usize>, x: &[f64]) -> usize {
        if self.finite {
            return label.expect("finite chains expose their state");
        }
        let mut idx = 0;
        for v in &x[..self.coords] {
            let b = ((v * self.bins as f64) as usize).min(self.bins - 1);
            idx = idx * self.bins + b;
        }
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::chain::{exact_phi_finite_chain, TransitionMatrix};
    use crate::mixing::stream::FiniteChainSpec;

    fn flip(p: f64, seed: u64) -> StreamSpec {
        let t = TransitionMatrix::symmetric_flip(p).unwrap();
        StreamSpec::finite_chain(FiniteChainSpec::new(t, vec![vec![0.0], vec![1.0]]).unwrap(), seed)
    }

    #[test]
    fn rejects_few_replicates() {
        let e = estimate_phi_empirical(&StreamSpec::iid_uniform(1, 0), 1, 99, 0);
        assert!(matches!(e, Err(Error::InsufficientReplicates { need: 100, got: 99 })));
    }

    #[test]
    fn iid_is_near_zero() {
        let e = estimate_phi_empirical(&StreamSpec::iid_uniform(1, 3), 3, 1000, 0).unwrap();
        assert!(e.value >= 0.0 && e.stderr >= 0.0);
        assert!(e.value <= 3.0 * e.stderr + 1e-12, "{e:?}");
    }

    #[test]
    fn two_state_chain_matches_exact() {
        let spec = flip(0.25, 7);
        let exact = exact_phi_finite_chain(spec.kind.finite_chain().map(|c| &c.transition).unwrap(), 2).unwrap();
        let e = estimate_phi_empirical(&spec, 2, 4000, 0).unwrap();
        assert!((e.value - exact).abs() <= 3.0 * e.stderr, "{e:?} vs {exact}");
        assert!(e.stderr > 0.0 && e.stderr < 0.05);
    }

    #[test]
    fn wrapped_chain_matches_inner_at_scaled_lag() {
        let spec = flip(0.1, 9).wrapped(3);
        let t = TransitionMatrix::symmetric_flip(0.1).unwrap();
        let exact = exact_phi_finite_chain(&t, 6).unwrap();
        let e = estimate_phi_empirical(&spec, 2, 4000, 0).unwrap();
        assert!((e.value - exact).abs() <= 3.0 * e.stderr, "{e:?} vs {exact}");
    }

    #[test]
    fn curve_is_identical_to_single_lag_calls() {
        let spec = StreamSpec::hold_time(1, 1.5, 1000, 5);
        let opts = PhiOptions::default();
        let curve = estimate_phi_curve(&spec, &[4, 1, 16], 500, 0, &opts).unwrap();
        let single = estimate_phi_curve(&spec, &[16], 500, 0, &opts).unwrap();
        assert_eq!(curve[2], single[0]);
        assert_eq!(curve[1].k, 1);
    }

    #[test]
    fn csv_row_format() {
        let e = PhiEstimate {
            k: 3,
            value: 0.5,
            stderr: 0.25,
            n_replicates: 100,
        };
        assert_eq!(e.csv_row(), "3,0.5,0.25,100");
    }
}
