//! Minimal feed-forward network machinery.
//!
//! Everything here is hand-written and exact: forward passes, reverse-mode
//! gradients, a diagonal-Gaussian action head, Adam, and a gated recurrent
//! cell for the dynamics model. No autodiff framework — the parameter count is
//! tiny (3×64 trunks) and exactness is checked against finite differences.
//!
//! The kernels are generic over the scalar type ([`crate::scalar::Real`],
//! f32 or f64); the crate root pins f64 aliases for the rest of the library.

mod adam;
mod gaussian;
mod gru;
mod mlp;

pub use adam::Adam;
pub use gaussian::{gaussian_entropy, gaussian_log_prob, gaussian_sample, GaussianHead};
pub use gru::{Gru, GruCache};
pub use mlp::{Mlp, MlpCache};

use crate::scalar::Real;

/// y += W x, W row-major with shape (rows x cols).
pub(crate) fn matvec_acc<S: Real>(w: &[S], rows: usize, cols: usize, x: &[S], y: &mut [S]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(y.len(), rows);
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        let mut acc = S::zero();
        for c in 0..cols {
            acc = acc + row[c] * x[c];
        }
        y[r] = y[r] + acc;
    }
}

/// y += Wᵀ x, W row-major with shape (rows x cols); x has length rows.
pub(crate) fn matvec_t_acc<S: Real>(w: &[S], rows: usize, cols: usize, x: &[S], y: &mut [S]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), rows);
    debug_assert_eq!(y.len(), cols);
    for r in 0..rows {
        let xr = x[r];
        let row = &w[r * cols..(r + 1) * cols];
        for c in 0..cols {
            y[c] = y[c] + row[c] * xr;
        }
    }
}

/// W += a ⊗ b (outer product), W row-major (len(a) x len(b)).
pub(crate) fn outer_acc<S: Real>(w: &mut [S], a: &[S], b: &[S]) {
    debug_assert_eq!(w.len(), a.len() * b.len());
    for (r, &ar) in a.iter().enumerate() {
        let row = &mut w[r * b.len()..(r + 1) * b.len()];
        for (c, &bc) in b.iter().enumerate() {
            row[c] = row[c] + ar * bc;
        }
    }
}

/// Rescales `grads` in place so the global L2 norm is at most `cap`.
/// Returns the pre-clip norm.
pub fn clip_global_norm<S: Real>(grads: &mut [S], cap: S) -> S {
    let norm = grads.iter().map(|&g| g * g).sum::<S>().sqrt();
    if norm > cap && norm > S::zero() {
        let scale = cap / norm;
        for g in grads.iter_mut() {
            *g = *g * scale;
        }
    }
    norm
}

/// Fills `out` with an orthogonal matrix (rows x cols, row-major) scaled by
/// `gain`, via modified Gram-Schmidt on the shorter side.
pub(crate) fn orthogonal_init<S: Real>(
    out: &mut [S],
    rows: usize,
    cols: usize,
    gain: S,
    rng: &mut crate::LabRng,
) where
    rand_distr::StandardNormal: rand_distr::Distribution<S>,
{
    use rand_distr::Distribution;
    debug_assert_eq!(out.len(), rows * cols);
    let normal = rand_distr::StandardNormal;
    // Orthonormalize along the shorter dimension; transpose bookkeeping keeps
    // the same storage either way.
    let (n_vecs, dim, transposed) = if rows <= cols {
        (rows, cols, false)
    } else {
        (cols, rows, true)
    };
    let mut m: Vec<Vec<S>> = (0..n_vecs)
        .map(|_| (0..dim).map(|_| normal.sample(rng)).collect())
        .collect();
    for i in 0..n_vecs {
        for j in 0..i {
            let dot = m[i]
                .iter()
                .zip(m[j].iter())
                .map(|(&a, &b)| a * b)
                .sum::<S>();
            for k in 0..dim {
                m[i][k] = m[i][k] - dot * m[j][k];
            }
        }
        let norm = m[i].iter().map(|&v| v * v).sum::<S>().sqrt();
        let inv = if norm > S::from_f64c(1e-12) {
            S::one() / norm
        } else {
            S::zero()
        };
        for k in 0..dim {
            m[i][k] = m[i][k] * inv;
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            let v = if transposed { m[c][r] } else { m[r][c] };
            out[r * cols + c] = gain * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn orthogonal_rows_are_orthonormal() {
        let mut rng = seeded(7);
        let (rows, cols) = (4, 9);
        let mut w = vec![0.0f64; rows * cols];
        orthogonal_init(&mut w, rows, cols, 1.0, &mut rng);
        for i in 0..rows {
            for j in 0..rows {
                let dot: f64 = (0..cols).map(|c| w[i * cols + c] * w[j * cols + c]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10, "({i},{j}) dot={dot}");
            }
        }
    }

    #[test]
    fn clip_caps_norm() {
        let mut g = vec![3.0f64, 4.0];
        let pre = clip_global_norm(&mut g, 0.5);
        assert!((pre - 5.0).abs() < 1e-12);
        let post: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((post - 0.5).abs() < 1e-12);
    }
}
