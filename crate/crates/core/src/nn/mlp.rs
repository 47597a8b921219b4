//! Feed-forward network with tanh hidden layers and identity output.

use serde::{Deserialize, Serialize};

use super::{matvec_acc, matvec_t_acc, orthogonal_init, outer_acc};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::LabRng;

/// Dense tanh network. Parameters live in one flat vector laid out as
/// `[W0, b0, W1, b1, ...]` with each `Wl` row-major `(sizes[l+1] x sizes[l])`,
/// so optimizers and clipping operate on plain slices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp<S> {
    sizes: Vec<usize>,
    params: Vec<S>,
}

/// Per-layer post-activations recorded by [`Mlp::forward_cached`], consumed by
/// [`Mlp::backward`]. `acts[0]` is the input, `acts.last()` the output.
#[derive(Debug, Clone)]
pub struct MlpCache<S> {
    acts: Vec<Vec<S>>,
}

impl<S: Real> Mlp<S> {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(Error::config(format!("bad layer sizes {sizes:?}")));
        }
        let n = Self::param_count(sizes);
        Ok(Mlp {
            sizes: sizes.to_vec(),
            params: vec![S::zero(); n],
        })
    }

    /// Orthogonal initialization: gain √2 on hidden layers, `output_gain` on
    /// the last layer (0.01 for policy heads, 1.0 for value heads). Biases 0.
    pub fn init(sizes: &[usize], output_gain: f64, rng: &mut LabRng) -> Result<Self>
    where
        rand_distr::StandardNormal: rand_distr::Distribution<S>,
    {
        let mut net = Self::zeros(sizes)?;
        let n_layers = sizes.len() - 1;
        for l in 0..n_layers {
            let (rows, cols) = (sizes[l + 1], sizes[l]);
            let gain = if l + 1 == n_layers {
                S::from_f64c(output_gain)
            } else {
                S::from_f64c(std::f64::consts::SQRT_2)
            };
            let (w_off, _) = net.layer_offsets(l);
            orthogonal_init(
                &mut net.params[w_off..w_off + rows * cols],
                rows,
                cols,
                gain,
                rng,
            );
        }
        Ok(net)
    }

    fn param_count(sizes: &[usize]) -> usize {
        sizes
            .windows(2)
            .map(|w| w[1] * w[0] + w[1])
            .sum()
    }

    /// (weight offset, bias offset) of layer `l` in the flat parameter vector.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let mut off = 0;
        for k in 0..l {
            off += self.sizes[k + 1] * self.sizes[k] + self.sizes[k + 1];
        }
        (off, off + self.sizes[l + 1] * self.sizes[l])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[S] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [S] {
        &mut self.params
    }

    /// Gradient buffer with the same flat layout as the parameters.
    pub fn zero_grad(&self) -> Vec<S> {
        vec![S::zero(); self.params.len()]
    }

    fn check_input(&self, input: &[S]) -> Result<()> {
        if input.len() != self.sizes[0] {
            return Err(Error::config(format!(
                "input length {} does not match layer width {}",
                input.len(),
                self.sizes[0]
            )));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[S]) -> Result<Vec<S>> {
        Ok(self.forward_cached(input)?.0)
    }

    pub fn forward_cached(&self, input: &[S]) -> Result<(Vec<S>, MlpCache<S>)> {
        self.check_input(input)?;
        let n_layers = self.sizes.len() - 1;
        let mut acts: Vec<Vec<S>> = Vec::with_capacity(n_layers + 1);
        acts.push(input.to_vec());
        for l in 0..n_layers {
            let (rows, cols) = (self.sizes[l + 1], self.sizes[l]);
            let (w_off, b_off) = self.layer_offsets(l);
            let mut z: Vec<S> = self.params[b_off..b_off + rows].to_vec();
            matvec_acc(
                &self.params[w_off..w_off + rows * cols],
                rows,
                cols,
                &acts[l],
                &mut z,
            );
            if l + 1 < n_layers {
                for v in z.iter_mut() {
                    *v = v.tanh();
                }
            }
            acts.push(z);
        }
        let out = acts.last().unwrap().clone();
        Ok((out, MlpCache { acts }))
    }

    /// Reverse-mode gradient of `output · output_grad` with respect to every
    /// weight and bias, accumulated into `grad` (flat layout). Returns the
    /// gradient with respect to the input.
    pub fn backward(
        &self,
        cache: &MlpCache<S>,
        output_grad: &[S],
        grad: &mut [S],
    ) -> Result<Vec<S>> {
        let n_layers = self.sizes.len() - 1;
        if output_grad.len() != self.output_dim() {
            return Err(Error::config(format!(
                "output_grad length {} does not match output width {}",
                output_grad.len(),
                self.output_dim()
            )));
        }
        if grad.len() != self.params.len() {
            return Err(Error::config("gradient buffer shape mismatch"));
        }
        let mut delta = output_grad.to_vec();
        for l in (0..n_layers).rev() {
            let (rows, cols) = (self.sizes[l + 1], self.sizes[l]);
            if l + 1 < n_layers {
                // Hidden layers cached post-tanh: d tanh = 1 - a².
                let a = &cache.acts[l + 1];
                for (d, &av) in delta.iter_mut().zip(a.iter()) {
                    *d = *d * (S::one() - av * av);
                }
            }
            let (w_off, b_off) = self.layer_offsets(l);
            outer_acc(&mut grad[w_off..w_off + rows * cols], &delta, &cache.acts[l]);
            for (g, &d) in grad[b_off..b_off + rows].iter_mut().zip(delta.iter()) {
                *g = *g + d;
            }
            let mut prev = vec![S::zero(); cols];
            matvec_t_acc(
                &self.params[w_off..w_off + rows * cols],
                rows,
                cols,
                &delta,
                &mut prev,
            );
            delta = prev;
        }
        Ok(delta)
    }
}
