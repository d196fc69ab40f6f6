//! Finite-state Markov chains: validation, stationary law, exact mixing
//! coefficients via matrix powers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_MAX_ITERS: usize = 1_000_000;

/// A validated row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() != p.ncols() || p.nrows() == 0 {
            return Err(Error::NotStochastic(format!(
                "matrix must be square and non-empty, got {}x{}",
                p.nrows(),
                p.ncols()
            )));
        }
        for (i, row) in p.row_iter().enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::NotStochastic(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { p })
    }

    /// Builds from row-major entries.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::NotStochastic(format!(
                "expected {} entries for {n} states, got {}",
                n * n,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    /// Two-state chain that flips with probability `p`.
    pub fn symmetric_flip(p: f64) -> Result<Self> {
        Self::from_row_major(2, &[1.0 - p, p, p, 1.0 - p])
    }

    pub fn n_states(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn row(&self, s: usize) -> Vec<f64> {
        self.p.row(s).iter().copied().collect()
    }

    /// P^k by binary exponentiation.
    pub fn power(&self, k: u64) -> DMatrix<f64> {
        matrix_power(&self.p, k)
    }

    /// The k-step kernel, itself a transition matrix.
    pub fn k_step(&self, k: u64) -> TransitionMatrix {
        let mut p = self.power(k);
        // renormalize rounding drift so the result still validates
        for mut row in p.row_iter_mut() {
            let s: f64 = row.iter().sum();
            row /= s;
        }
        TransitionMatrix { p }
    }

    /// Irreducible and aperiodic, i.e. the support graph is primitive.
    /// Uses Wielandt's bound: a primitive n x n matrix has P^((n-1)^2+1) > 0.
    pub fn is_primitive(&self) -> bool {
        let n = self.n_states();
        let support = DMatrix::from_fn(n, n, |i, j| self.p[(i, j)] > 0.0);
        let target = (n - 1) * (n - 1) + 1;
        let mut acc: Option<DMatrix<bool>> = None;
        let mut base = support;
        let mut e = target;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => bool_mul(&a, &base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = bool_mul(&base, &base);
            }
        }
        acc.map(|a| a.iter().all(|&b| b)).unwrap_or(false)
    }

    /// Stationary distribution by power iteration, to 1e-12 in L1.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        if !self.is_primitive() {
            return Err(Error::NotErgodic);
        }
        let n = self.n_states();
        let pt = self.p.transpose();
        let mut mu = nalgebra::DVector::from_element(n, 1.0 / n as f64);
        for _ in 0..STATIONARY_MAX_ITERS {
            let mut next = &pt * &mu;
            let s = next.sum();
            next /= s;
            let diff: f64 = (&next - &mu).iter().map(|v| v.abs()).sum();
            mu = next;
            if diff < STATIONARY_TOL {
                return Ok(mu.iter().copied().collect());
            }
        }
        Err(Error::StationaryNotConverged(STATIONARY_MAX_ITERS))
    }
}

fn bool_mul(a: &DMatrix<bool>, b: &DMatrix<bool>) -> DMatrix<bool> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| (0..n).any(|k| a[(i, k)] && b[(k, j)]))
}

pub fn matrix_power(p: &DMatrix<f64>, k: u64) -> DMatrix<f64> {
    let n = p.nrows();
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut base = p.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// max_s sum_y |P^k(s, y) - mu(y)| for an ergodic finite chain.
pub fn exact_phi_finite_chain(transition: &TransitionMatrix, k: u64) -> Result<f64> {
    let mu = transition.stationary()?;
    Ok(exact_phi_with_stationary(transition, &mu, k))
}

pub(crate) fn exact_phi_with_stationary(transition: &TransitionMatrix, mu: &[f64], k: u64) -> f64 {
    let pk = transition.power(k);
    pk.row_iter()
        .map(|row| row.iter().zip(mu).map(|(p, m)| (p - m).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Exact phi(1..=max_lag), forced non-increasing against rounding.
pub fn exact_phi_curve(transition: &TransitionMatrix, max_lag: u64) -> Result<Vec<f64>> {
    let mu = transition.stationary()?;
    let n = transition.n_states();
    let mut pk = DMatrix::<f64>::identity(n, n);
    let mut out = Vec::with_capacity(max_lag as usize);
    let mut running = f64::INFINITY;
    for _ in 0..max_lag {
        pk = &pk * transition.matrix();
        let v = pk
            .row_iter()
            .map(|row| row.iter().zip(&mu).map(|(p, m)| (p - m).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        running = running.min(v).min(2.0);
        out.push(running);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_bad_rows() {
        assert!(TransitionMatrix::from_row_major(2, &[0.5, 0.4, 0.5, 0.5]).is_err());
        assert!(TransitionMatrix::from_row_major(2, &[1.2, -0.2, 0.5, 0.5]).is_err());
        assert!(TransitionMatrix::from_row_major(2, &[1.0, 0.0, 0.5]).is_err());
    }

    #[test]
    fn symmetric_flip_two_steps() {
        // P^2 = [[0.625, 0.375], [0.375, 0.625]], mu = (1/2, 1/2)
        let p = TransitionMatrix::symmetric_flip(0.25).unwrap();
        assert_abs_diff_eq!(exact_phi_finite_chain(&p, 2).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_phi_finite_chain(&p, 1).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn identity_and_periodic_rejected() {
        let id = TransitionMatrix::from_row_major(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(exact_phi_finite_chain(&id, 1), Err(Error::NotErgodic)));
        let flip = TransitionMatrix::from_row_major(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(flip.stationary(), Err(Error::NotErgodic)));
    }

    #[test]
    fn single_state_chain_is_trivially_mixed() {
        let one = TransitionMatrix::from_row_major(1, &[1.0]).unwrap();
        assert_eq!(one.stationary().unwrap(), vec![1.0]);
        assert_eq!(exact_phi_finite_chain(&one, 3).unwrap(), 0.0);
    }

    #[test]
    fn stationary_solves_balance() {
        let p = TransitionMatrix::from_row_major(3, &[0.5, 0.3, 0.2, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4])
            .unwrap();
        let mu = p.stationary().unwrap();
        let m = p.matrix();
        for j in 0..3 {
            let flow: f64 = (0..3).map(|i| mu[i] * m[(i, j)]).sum();
            assert_abs_diff_eq!(flow, mu[j], epsilon = 1e-11);
        }
    }

    #[test]
    fn phi_curve_in_range_and_nonincreasing() {
        let p = TransitionMatrix::from_row_major(3, &[0.9, 0.1, 0.0, 0.0, 0.9, 0.1, 0.1, 0.0, 0.9])
            .unwrap();
        let curve = exact_phi_curve(&p, 50).unwrap();
        assert!(curve.windows(2).all(|w| w[0] >= w[1]));
        assert!(curve.iter().all(|v| (0.0..=2.0).contains(v)));
    }
}
