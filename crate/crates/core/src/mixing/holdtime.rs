//! Hold-time law of the renewal stream: a fresh uniform draw is held for a
//! duration N with P(N = j) proportional to j^-(1 + alpha), 1 <= j <= max_hold.
//!
//! Under stationarity the probability that the sample k steps ahead still
//! belongs to the current hold is E[(N - k)^+] / E[N], which decays like
//! k^-(alpha - 1). That persistence drives every dependence effect of the
//! stream, so it is computed exactly here and used to calibrate alpha.

use rand::Rng;

use crate::error::{Error, Result};

/// Lags used when fitting the decay exponent of the persistence curve.
pub const FIT_LAGS: [u64; 9] = [2, 4, 8, 16, 32, 64, 128, 256, 512];

#[derive(Debug, Clone)]
pub struct HoldTimeLaw {
    alpha: f64,
    max_hold: usize,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    // P(remaining run length from a stationary position = m), as a CDF
    residual_cdf: Vec<f64>,
    mean: f64,
}

impl HoldTimeLaw {
    pub fn new(alpha: f64, max_hold: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param(format!("hold-time tail exponent must be positive, got {alpha}")));
        }
        if max_hold < 1 {
            return Err(Error::param("max_hold must be at least 1"));
        }
        let mut pmf: Vec<f64> = (1..=max_hold).map(|j| (j as f64).powf(-(1.0 + alpha))).collect();
        let z: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= z);
        let cdf = cumulative(&pmf);
        let mean: f64 = pmf.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
        // P(N >= m) / E[N]
        let mut survival = vec![0.0; max_hold];
        let mut tail = 0.0;
        for m in (0..max_hold).rev() {
            tail += pmf[m];
            survival[m] = tail / mean;
        }
        let residual_cdf = cumulative(&survival);
        Ok(Self {
            alpha,
            max_hold,
            pmf,
            cdf,
            residual_cdf,
            mean,
        })
    }

    /// Calibrates alpha so that the log-log slope of the stationary
    /// persistence over [`FIT_LAGS`] equals `-1 / mix_rate`.
    pub fn for_mix_rate(mix_rate: f64, max_hold: usize) -> Result<Self> {
        let alpha = calibrate_alpha(mix_rate, max_hold)?;
        Self::new(alpha, max_hold)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn max_hold(&self) -> usize {
        self.max_hold
    }

    pub fn mean_hold(&self) -> f64 {
        self.mean
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// P(N > j).
    pub fn survival(&self, j: u64) -> f64 {
        if j == 0 {
            1.0
        } else if j as usize >= self.max_hold {
            0.0
        } else {
            (1.0 - self.cdf[j as usize - 1]).max(0.0)
        }
    }

    /// Stationary probability that the sample `k` steps ahead is still the
    /// currently held value.
    pub fn persistence(&self, k: u64) -> f64 {
        let k = k as usize;
        self.pmf
            .iter()
            .enumerate()
            .skip(k)
            .map(|(i, p)| (i + 1 - k) as f64 * p)
            .sum::<f64>()
            / self.mean
    }

    /// Least-squares slope of log persistence against log lag.
    pub fn fitted_decay(&self) -> f64 {
        let pts: Vec<(f64, f64)> = FIT_LAGS
            .iter()
            .map(|&k| (k as f64, self.persistence(k)))
            .collect();
        -loglog_slope(&pts)
    }

    pub fn sample_hold<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        search(&self.cdf, rng.gen::<f64>()) + 1
    }

    /// Run length (including the next emitted sample) seen from a stationary
    /// position inside a hold.
    pub fn sample_residual<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        search(&self.residual_cdf, rng.gen::<f64>()) + 1
    }
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
    let total = acc;
    out.iter_mut().for_each(|v| *v /= total);
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn search(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Ordinary least-squares slope of log(y) on log(x); non-positive y are skipped.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return f64::NAN;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn calibrate_alpha(mix_rate: f64, max_hold: usize) -> Result<f64> {
    if !(mix_rate.is_finite() && mix_rate > 0.0) {
        return Err(Error::param(format!("mix_rate must be positive, got {mix_rate}")));
    }
    let target = 1.0 / mix_rate;
    let decay = |alpha: f64| -> Result<f64> { Ok(HoldTimeLaw::new(alpha, max_hold)?.fitted_decay()) };
    let (mut lo, mut hi) = (1.0 + 1e-6, 4.0);
    if decay(lo)? > target || decay(hi)? < target {
        return Err(Error::param(format!(
            "mix_rate {mix_rate} is outside the range reachable with max_hold {max_hold}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if decay(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
