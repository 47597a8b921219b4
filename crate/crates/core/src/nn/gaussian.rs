//! Diagonal Gaussian action head with state-independent log-std.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::LabRng;

/// Clamp bounds for log-std; keeps σ strictly positive and bounded.
pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const LN_2PI: f64 = 1.8378770664093453;

/// Learned per-dimension log standard deviation of the action distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianHead<S> {
    pub log_std: Vec<S>,
}

impl<S: Real> GaussianHead<S> {
    pub fn new(action_dim: usize, initial_log_std: f64) -> Self {
        GaussianHead {
            log_std: vec![S::from_f64c(initial_log_std); action_dim],
        }
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn clamped(&self) -> Vec<S> {
        self.log_std
            .iter()
            .map(|&l| {
                l.max(S::from_f64c(LOG_STD_MIN))
                    .min(S::from_f64c(LOG_STD_MAX))
            })
            .collect()
    }
}

fn check_dims<S>(mean: &[S], log_std: &[S], action: &[S]) -> Result<()> {
    if mean.len() != log_std.len() || mean.len() != action.len() {
        return Err(Error::config(format!(
            "gaussian dims: mean {}, log_std {}, action {}",
            mean.len(),
            log_std.len(),
            action.len()
        )));
    }
    Ok(())
}

/// Sum over dimensions of −½((a−m)/σ)² − log σ − ½ log 2π, with log-std
/// clamped to `[LOG_STD_MIN, LOG_STD_MAX]`.
pub fn gaussian_log_prob<S: Real>(mean: &[S], log_std: &[S], action: &[S]) -> Result<S> {
    check_dims(mean, log_std, action)?;
    let half = S::from_f64c(0.5);
    let ln_2pi = S::from_f64c(LN_2PI);
    let mut lp = S::zero();
    for i in 0..mean.len() {
        let ls = log_std[i]
            .max(S::from_f64c(LOG_STD_MIN))
            .min(S::from_f64c(LOG_STD_MAX));
        let z = (action[i] - mean[i]) / ls.exp();
        lp = lp - half * z * z - ls - half * ln_2pi;
    }
    Ok(lp)
}

/// mean + σ ⊙ ε with ε standard normal; reproducible under a fixed seed.
pub fn gaussian_sample<S: Real>(mean: &[S], log_std: &[S], rng: &mut LabRng) -> Result<Vec<S>>
where
    rand_distr::StandardNormal: rand_distr::Distribution<S>,
{
    use rand_distr::Distribution;
    if mean.len() != log_std.len() {
        return Err(Error::config("gaussian dims: mean vs log_std"));
    }
    let normal = rand_distr::StandardNormal;
    Ok(mean
        .iter()
        .zip(log_std.iter())
        .map(|(&m, &ls)| {
            let ls = ls
                .max(S::from_f64c(LOG_STD_MIN))
                .min(S::from_f64c(LOG_STD_MAX));
            let eps: S = normal.sample(rng);
            m + ls.exp() * eps
        })
        .collect())
}

/// Differential entropy Σ (log σ + ½ log 2πe).
pub fn gaussian_entropy<S: Real>(log_std: &[S]) -> S {
    let half = S::from_f64c(0.5);
    let c = S::from_f64c(LN_2PI + 1.0);
    log_std
        .iter()
        .map(|&ls| {
            let ls = ls
                .max(S::from_f64c(LOG_STD_MIN))
                .min(S::from_f64c(LOG_STD_MAX));
            ls + half * c
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    const STD_NORMAL_MODE: f64 = -0.9189385332046727; // -½ log 2π

    #[test]
    fn standard_normal_at_mode() {
        let lp = gaussian_log_prob(&[0.0], &[0.0], &[0.0]).unwrap();
        assert!((lp - STD_NORMAL_MODE).abs() < 1e-9);
    }

    #[test]
    fn unit_deviation() {
        let lp = gaussian_log_prob(&[0.0], &[0.0], &[1.0]).unwrap();
        assert!((lp - (STD_NORMAL_MODE - 0.5)).abs() < 1e-9);
    }

    #[test]
    fn independent_dims_sum() {
        let lp = gaussian_log_prob(&[0.0; 3], &[0.0; 3], &[0.0; 3]).unwrap();
        assert!((lp - 3.0 * STD_NORMAL_MODE).abs() < 1e-9);
    }

    #[test]
    fn vanishing_sigma_returns_mean() {
        let mut rng = seeded(1);
        let mean = vec![3.0f64, -1.5];
        // Extreme log-std is clamped at -20, so σ ≈ 2e-9.
        let s = gaussian_sample(&mean, &[-1e9, -1e9], &mut rng).unwrap();
        for (a, m) in s.iter().zip(mean.iter()) {
            assert!((a - m).abs() <= 1e-8 * m.abs() + 1e-8);
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let a = gaussian_sample(&[0.0; 4], &[0.0; 4], &mut seeded(42)).unwrap();
        let b = gaussian_sample(&[0.0; 4], &[0.0; 4], &mut seeded(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_moments_match_law_of_large_numbers() {
        let mut rng = seeded(7);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let s = gaussian_sample(&[0.0], &[0.0], &mut rng).unwrap()[0];
            sum += s;
            sumsq += s * s;
        }
        let mean = sum / n as f64;
        let std = (sumsq / n as f64 - mean * mean).sqrt();
        assert!(mean.abs() < 0.02, "sample mean {mean}");
        assert!((0.98..=1.02).contains(&std), "sample std {std}");
    }

    #[test]
    fn log_prob_integrates_to_one() {
        // Trapezoid rule over [-8σ, 8σ] in 1-D.
        let n = 16_000;
        let (lo, hi) = (-8.0, 8.0);
        let h = (hi - lo) / n as f64;
        let mut integral = 0.0;
        for i in 0..=n {
            let x = lo + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            integral += w * gaussian_log_prob(&[0.0], &[0.0], &[x]).unwrap().exp();
        }
        integral *= h;
        assert!((integral - 1.0).abs() < 1e-3, "integral {integral}");
    }
}
