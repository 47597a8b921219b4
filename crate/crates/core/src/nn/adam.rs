//! Adam with bias correction, over flat parameter slices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam<S> {
    lr: S,
    beta1: S,
    beta2: S,
    eps: S,
    m: Vec<S>,
    v: Vec<S>,
    t: u64,
}

impl<S: Real> Adam<S> {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam {
            lr: S::from_f64c(lr),
            beta1: S::from_f64c(0.9),
            beta2: S::from_f64c(0.999),
            eps: S::from_f64c(1e-8),
            m: vec![S::zero(); n_params],
            v: vec![S::zero(); n_params],
            t: 0,
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.lr = S::from_f64c(lr);
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One Adam update in place. A non-finite gradient entry fails the whole
    /// update: divergence must surface, not be averaged away.
    pub fn step(&mut self, params: &mut [S], grads: &[S]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::config(format!(
                "adam state sized {} given params {} / grads {}",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient entry {i} is {:?} at optimizer step {}",
                grads[i],
                self.t + 1
            )));
        }
        self.t += 1;
        let t = self.t as i32;
        let bc1 = S::one() - self.beta1.powi(t);
        let bc2 = S::one() - self.beta2.powi(t);
        let one = S::one();
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (one - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (one - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] = params[i] - self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut adam = Adam::<f64>::new(3, 1e-3);
        let mut p = vec![1.0, -2.0, 0.5];
        let before = p.clone();
        adam.step(&mut p, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p, before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_magnitude_is_lr() {
        // Scalar parameter, g = 1, defaults: m̂ = 1, v̂ = 1, so the first step
        // is -lr / (1 + eps·scale) ≈ -3e-4.
        let mut adam = Adam::<f64>::new(1, 3e-4);
        let mut p = vec![0.0];
        adam.step(&mut p, &[1.0]).unwrap();
        assert!((p[0] + 3e-4).abs() < 1e-8, "first step {}", p[0]);
    }

    #[test]
    fn constant_gradient_approaches_lr_sized_steps() {
        let mut adam = Adam::<f64>::new(1, 1e-2);
        let mut p = vec![0.0];
        let mut prev = 0.0;
        for _ in 0..200 {
            prev = p[0];
            adam.step(&mut p, &[1.0]).unwrap();
        }
        let step = prev - p[0];
        assert!(step > 0.0, "moves against the gradient");
        assert!((step - 1e-2).abs() < 1e-3, "asymptotic step {step}");
    }

    #[test]
    fn non_finite_gradient_fails_loudly() {
        let mut adam = Adam::<f64>::new(2, 1e-3);
        let mut p = vec![0.0, 0.0];
        let err = adam.step(&mut p, &[1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        // State untouched by the failed update.
        assert_eq!(adam.step_count(), 0);
        assert_eq!(p, vec![0.0, 0.0]);
    }
}
