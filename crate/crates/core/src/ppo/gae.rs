//! Generalized advantage estimation.

use crate::error::{Error, Result};

/// Recursive GAE over one episode segment.
///
/// `bootstrap` is V(s_T) for a non-terminal final step (horizon cut) and is
/// ignored when `terminal` is true. Returns (advantages, returns) with
/// returns = advantages + values.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    terminal: bool,
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if rewards.len() != values.len() {
        return Err(Error::config(format!(
            "gae: {} rewards vs {} values",
            rewards.len(),
            values.len()
        )));
    }
    let n = rewards.len();
    let mut advantages = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let v_next = if t + 1 < n {
            values[t + 1]
        } else if terminal {
            0.0
        } else {
            bootstrap
        };
        let delta = rewards[t] + gamma * v_next - values[t];
        acc = delta + gamma * lambda * acc;
        advantages[t] = acc;
    }
    let returns = advantages
        .iter()
        .zip(values.iter())
        .map(|(a, v)| a + v)
        .collect();
    Ok((advantages, returns))
}

/// Normalize to zero mean, unit variance, in place. A near-constant batch is
/// only centered.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std > 1e-12 {
        for a in adv.iter_mut() {
            *a = (*a - mean) / std;
        }
    } else {
        for a in adv.iter_mut() {
            *a -= mean;
        }
    }
}
