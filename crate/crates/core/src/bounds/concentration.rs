//! Tail-bound right-hand sides, clamped to [0, 1].

use crate::error::{Error, Result};

/// min(1, 2 exp(-lambda^2/2) + sum tail_probs), bounding
/// P(|Y - EY| >= lambda sqrt(sum alpha_t^2)).
pub fn azuma_rhs(lambda: f64, alphas: &[f64], tail_probs: &[f64]) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::param("lambda must be nonnegative"));
    }
    if alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::param("alphas must be positive"));
    }
    if tail_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::param("tail probabilities must lie in [0, 1]"));
    }
    Ok((2.0 * (-lambda * lambda / 2.0).exp() + tail_probs.iter().sum::<f64>()).min(1.0))
}

/// lambda sqrt(sum alpha_t^2), the deviation level `azuma_rhs` refers to.
pub fn azuma_threshold(lambda: f64, alphas: &[f64]) -> f64 {
    lambda * alphas.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// min(1, exp(-t^2 / (2(v + 2q) + 2tm/3))), bounding P(sum_{i<=n} Z_i >= t).
pub fn bernstein_rhs(t: f64, v: f64, q: f64, m: f64, n: u64) -> Result<f64> {
    if [t, v, q, m].iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::param("t, v, q and m must be nonnegative"));
    }
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let denom = 2.0 * (v + 2.0 * q) + 2.0 * t * m / 3.0;
    if denom <= 0.0 {
        return Err(Error::param("zero variance proxy with positive t"));
    }
    Ok((-t * t / denom).exp().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn azuma_examples() {
        assert_eq!(azuma_rhs(0.0, &[1.0], &[0.0]).unwrap(), 1.0);
        let delta = 0.05f64;
        let lam = (2.0 * (2.0 / delta).ln()).sqrt();
        assert_relative_eq!(azuma_rhs(lam, &[1.0; 3], &[0.0; 3]).unwrap(), delta, epsilon = 1e-15);
        assert!(azuma_rhs(-1.0, &[1.0], &[0.0]).is_err());
        assert!(azuma_rhs(1.0, &[1.0], &[1.5]).is_err());
        assert_relative_eq!(azuma_threshold(2.0, &[3.0, 4.0]), 10.0);
    }

    #[test]
    fn bernstein_examples() {
        assert_eq!(bernstein_rhs(0.0, 0.0, 0.0, 0.0, 5).unwrap(), 1.0);
        assert_relative_eq!(
            bernstein_rhs(3.0, 2.0, 0.0, 1e-300, 10).unwrap(),
            (-9.0f64 / 4.0).exp(),
            epsilon = 1e-15
        );
        assert!(bernstein_rhs(1.0, 0.0, 0.0, 0.0, 10).is_err());
        assert!(bernstein_rhs(1.0, -1.0, 0.0, 1.0, 10).is_err());
    }

    proptest! {
        #[test]
        fn outputs_are_probabilities(
            lam in 0.0f64..10.0,
            tails in proptest::collection::vec(0.0f64..=1.0, 0..5),
            t in 0.0f64..50.0, v in 0.0f64..10.0, q in 0.0f64..10.0, m in 0.01f64..5.0,
        ) {
            let alphas = vec![1.0; tails.len()];
            let a = azuma_rhs(lam, &alphas, &tails).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            let b = bernstein_rhs(t, v, q, m, 10).unwrap();
            prop_assert!((0.0..=1.0).contains(&b));
        }
    }
}
