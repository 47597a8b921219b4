//! Gated recurrent cell with an output projection, plus backprop through time.
//!
//! The dynamics model needs memory across a trajectory, not a specific gate
//! algebra; a standard GRU (update gate z, reset gate r, candidate c) is used
//! here in place of an LSTM — fewer parameters, one state vector to thread,
//! and the same ability to carry information over long horizons. The choice
//! is also recorded in the README.

use serde::{Deserialize, Serialize};

use super::{matvec_acc, matvec_t_acc, orthogonal_init, outer_acc};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::LabRng;

/// z = σ(Wz x + Uz h + bz), r = σ(Wr x + Ur h + br),
/// c = tanh(Wc x + Uc (r⊙h) + bc), h' = (1−z)⊙h + z⊙c, y = Wo h'.
///
/// Flat parameter layout: `[Wz, Uz, bz, Wr, Ur, br, Wc, Uc, bc, Wo]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Gru<S> {
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    params: Vec<S>,
}

/// Per-step values recorded during the forward pass.
#[derive(Debug, Clone)]
struct StepCache<S> {
    x: Vec<S>,
    h_prev: Vec<S>,
    z: Vec<S>,
    r: Vec<S>,
    c: Vec<S>,
    rh: Vec<S>,
    h: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct GruCache<S> {
    steps: Vec<StepCache<S>>,
}

fn sigmoid<S: Real>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

impl<S: Real> Gru<S> {
    pub fn zeros(input_dim: usize, hidden_dim: usize, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || output_dim == 0 {
            return Err(Error::config("gru dims must be positive"));
        }
        let n = 3 * (hidden_dim * input_dim + hidden_dim * hidden_dim + hidden_dim)
            + output_dim * hidden_dim;
        Ok(Gru {
            input_dim,
            hidden_dim,
            output_dim,
            params: vec![S::zero(); n],
        })
    }

    pub fn init(
        input_dim: usize,
        hidden_dim: usize,
        output_dim: usize,
        rng: &mut LabRng,
    ) -> Result<Self>
    where
        rand_distr::StandardNormal: rand_distr::Distribution<S>,
    {
        let mut g = Self::zeros(input_dim, hidden_dim, output_dim)?;
        let (i, h, o) = (input_dim, hidden_dim, output_dim);
        let one = S::one();
        let mut off = 0;
        for _gate in 0..3 {
            orthogonal_init(&mut g.params[off..off + h * i], h, i, one, rng);
            off += h * i;
            orthogonal_init(&mut g.params[off..off + h * h], h, h, one, rng);
            off += h * h;
            off += h; // biases stay zero
        }
        orthogonal_init(&mut g.params[off..off + o * h], o, h, one, rng);
        Ok(g)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
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

    pub fn zero_grad(&self) -> Vec<S> {
        vec![S::zero(); self.params.len()]
    }

    /// Offsets of [Wz, Uz, bz, Wr, Ur, br, Wc, Uc, bc, Wo].
    fn offsets(&self) -> [usize; 10] {
        let (i, h) = (self.input_dim, self.hidden_dim);
        let gate = h * i + h * h + h;
        let mut out = [0usize; 10];
        for g in 0..3 {
            out[g * 3] = g * gate;
            out[g * 3 + 1] = g * gate + h * i;
            out[g * 3 + 2] = g * gate + h * i + h * h;
        }
        out[9] = 3 * gate;
        out
    }

    /// Runs the cell over `inputs`, starting from a zero hidden state.
    /// Returns one output per step and the final hidden state.
    pub fn forward(&self, inputs: &[Vec<S>]) -> Result<(Vec<Vec<S>>, Vec<S>)> {
        let (ys, _, h) = self.forward_cached(inputs)?;
        Ok((ys, h))
    }

    pub fn forward_cached(
        &self,
        inputs: &[Vec<S>],
    ) -> Result<(Vec<Vec<S>>, GruCache<S>, Vec<S>)> {
        let (i_dim, h_dim, o_dim) = (self.input_dim, self.hidden_dim, self.output_dim);
        let off = self.offsets();
        let p = &self.params;
        let mut h = vec![S::zero(); h_dim];
        let mut ys = Vec::with_capacity(inputs.len());
        let mut steps = Vec::with_capacity(inputs.len());
        for x in inputs {
            if x.len() != i_dim {
                return Err(Error::config(format!(
                    "sequence element length {} != input width {i_dim}",
                    x.len()
                )));
            }
            let mut z: Vec<S> = p[off[2]..off[2] + h_dim].to_vec();
            matvec_acc(&p[off[0]..off[0] + h_dim * i_dim], h_dim, i_dim, x, &mut z);
            matvec_acc(&p[off[1]..off[1] + h_dim * h_dim], h_dim, h_dim, &h, &mut z);
            for v in z.iter_mut() {
                *v = sigmoid(*v);
            }
            let mut r: Vec<S> = p[off[5]..off[5] + h_dim].to_vec();
            matvec_acc(&p[off[3]..off[3] + h_dim * i_dim], h_dim, i_dim, x, &mut r);
            matvec_acc(&p[off[4]..off[4] + h_dim * h_dim], h_dim, h_dim, &h, &mut r);
            for v in r.iter_mut() {
                *v = sigmoid(*v);
            }
            let rh: Vec<S> = r.iter().zip(h.iter()).map(|(&a, &b)| a * b).collect();
            let mut c: Vec<S> = p[off[8]..off[8] + h_dim].to_vec();
            matvec_acc(&p[off[6]..off[6] + h_dim * i_dim], h_dim, i_dim, x, &mut c);
            matvec_acc(&p[off[7]..off[7] + h_dim * h_dim], h_dim, h_dim, &rh, &mut c);
            for v in c.iter_mut() {
                *v = v.tanh();
            }
            let h_new: Vec<S> = (0..h_dim)
                .map(|k| (S::one() - z[k]) * h[k] + z[k] * c[k])
                .collect();
            let mut y = vec![S::zero(); o_dim];
            matvec_acc(&p[off[9]..off[9] + o_dim * h_dim], o_dim, h_dim, &h_new, &mut y);
            ys.push(y);
            steps.push(StepCache {
                x: x.clone(),
                h_prev: h.clone(),
                z,
                r,
                c,
                rh,
                h: h_new.clone(),
            });
            h = h_new;
        }
        Ok((ys, GruCache { steps }, h))
    }

    /// Backprop through time: accumulates into `grad` the gradient of
    /// Σ_t y_t · output_grads[t] with respect to every parameter.
    pub fn backward(
        &self,
        cache: &GruCache<S>,
        output_grads: &[Vec<S>],
        grad: &mut [S],
    ) -> Result<()> {
        if output_grads.len() != cache.steps.len() {
            return Err(Error::config("output_grads length != sequence length"));
        }
        if grad.len() != self.params.len() {
            return Err(Error::config("gradient buffer shape mismatch"));
        }
        let (i_dim, h_dim, o_dim) = (self.input_dim, self.hidden_dim, self.output_dim);
        let off = self.offsets();
        let p = &self.params;
        let one = S::one();
        let mut dh = vec![S::zero(); h_dim];
        for (t, step) in cache.steps.iter().enumerate().rev() {
            let dy = &output_grads[t];
            if dy.len() != o_dim {
                return Err(Error::config("output grad width mismatch"));
            }
            outer_acc(&mut grad[off[9]..off[9] + o_dim * h_dim], dy, &step.h);
            matvec_t_acc(&p[off[9]..off[9] + o_dim * h_dim], o_dim, h_dim, dy, &mut dh);

            let dc: Vec<S> = (0..h_dim).map(|k| dh[k] * step.z[k]).collect();
            let dz: Vec<S> = (0..h_dim)
                .map(|k| dh[k] * (step.c[k] - step.h_prev[k]))
                .collect();
            let mut dh_prev: Vec<S> = (0..h_dim).map(|k| dh[k] * (one - step.z[k])).collect();

            // Candidate path (tanh).
            let dac: Vec<S> = (0..h_dim)
                .map(|k| dc[k] * (one - step.c[k] * step.c[k]))
                .collect();
            outer_acc(&mut grad[off[6]..off[6] + h_dim * i_dim], &dac, &step.x);
            outer_acc(&mut grad[off[7]..off[7] + h_dim * h_dim], &dac, &step.rh);
            for (g, &d) in grad[off[8]..off[8] + h_dim].iter_mut().zip(dac.iter()) {
                *g = *g + d;
            }
            let mut drh = vec![S::zero(); h_dim];
            matvec_t_acc(&p[off[7]..off[7] + h_dim * h_dim], h_dim, h_dim, &dac, &mut drh);
            let dr: Vec<S> = (0..h_dim).map(|k| drh[k] * step.h_prev[k]).collect();
            for k in 0..h_dim {
                dh_prev[k] = dh_prev[k] + drh[k] * step.r[k];
            }

            // Reset gate (sigmoid).
            let dar: Vec<S> = (0..h_dim)
                .map(|k| dr[k] * step.r[k] * (one - step.r[k]))
                .collect();
            outer_acc(&mut grad[off[3]..off[3] + h_dim * i_dim], &dar, &step.x);
            outer_acc(&mut grad[off[4]..off[4] + h_dim * h_dim], &dar, &step.h_prev);
            for (g, &d) in grad[off[5]..off[5] + h_dim].iter_mut().zip(dar.iter()) {
                *g = *g + d;
            }
            matvec_t_acc(
                &p[off[4]..off[4] + h_dim * h_dim],
                h_dim,
                h_dim,
                &dar,
                &mut dh_prev,
            );

            // Update gate (sigmoid).
            let daz: Vec<S> = (0..h_dim)
                .map(|k| dz[k] * step.z[k] * (one - step.z[k]))
                .collect();
            outer_acc(&mut grad[off[0]..off[0] + h_dim * i_dim], &daz, &step.x);
            outer_acc(&mut grad[off[1]..off[1] + h_dim * h_dim], &daz, &step.h_prev);
            for (g, &d) in grad[off[2]..off[2] + h_dim].iter_mut().zip(daz.iter()) {
                *g = *g + d;
            }
            matvec_t_acc(
                &p[off[1]..off[1] + h_dim * h_dim],
                h_dim,
                h_dim,
                &daz,
                &mut dh_prev,
            );

            dh = dh_prev;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand_distr::Distribution;

    #[test]
    fn zero_weights_give_zero_outputs() {
        let gru = Gru::<f64>::zeros(3, 5, 2).unwrap();
        let seq: Vec<Vec<f64>> = vec![vec![1.0, -2.0, 0.5]; 4];
        let (ys, h) = gru.forward(&seq).unwrap();
        assert!(ys.iter().flatten().all(|&v| v == 0.0));
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn length_one_equals_single_cell_application() {
        let mut rng = seeded(5);
        let gru = Gru::<f64>::init(3, 6, 2, &mut rng).unwrap();
        let x = vec![0.2, -0.7, 1.1];
        let (ys, h1) = gru.forward(std::slice::from_ref(&x)).unwrap();
        // Two-step run: the first step must reproduce the single-step values.
        let (ys2, _) = gru.forward(&[x.clone(), x.clone()]).unwrap();
        assert_eq!(ys[0], ys2[0]);
        let (_, _, h_again) = gru.forward_cached(std::slice::from_ref(&x)).unwrap();
        assert_eq!(h1, h_again);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let gru = Gru::<f64>::zeros(3, 4, 2).unwrap();
        assert!(gru.forward(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn bptt_matches_finite_differences() {
        let mut rng = seeded(21);
        let normal = rand_distr::StandardNormal;
        for trial in 0..5 {
            let mut gru = Gru::<f64>::init(3, 4, 2, &mut rng).unwrap();
            let seq: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..3).map(|_| normal.sample(&mut rng)).collect())
                .collect();
            let ogs: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..2).map(|_| normal.sample(&mut rng)).collect())
                .collect();
            let loss = |g: &Gru<f64>| -> f64 {
                let (ys, _) = g.forward(&seq).unwrap();
                ys.iter()
                    .zip(ogs.iter())
                    .map(|(y, og)| y.iter().zip(og.iter()).map(|(a, b)| a * b).sum::<f64>())
                    .sum()
            };
            let (_, cache, _) = gru.forward_cached(&seq).unwrap();
            let mut grad = gru.zero_grad();
            gru.backward(&cache, &ogs, &mut grad).unwrap();
            let h = 1e-5;
            for idx in 0..gru.n_params() {
                let orig = gru.params()[idx];
                gru.params_mut()[idx] = orig + h;
                let up = loss(&gru);
                gru.params_mut()[idx] = orig - h;
                let dn = loss(&gru);
                gru.params_mut()[idx] = orig;
                let fd = (up - dn) / (2.0 * h);
                let denom = fd.abs().max(grad[idx].abs()).max(1e-6);
                assert!(
                    (fd - grad[idx]).abs() / denom < 1e-3,
                    "trial {trial} param {idx}: analytic {} vs fd {fd}",
                    grad[idx]
                );
            }
        }
    }
}
