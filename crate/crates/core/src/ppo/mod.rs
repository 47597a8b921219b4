//! Proximal policy optimization: rollout collection with per-rollout dynamics
//! resampling, GAE, and clipped-surrogate updates with hand-written gradients.
//!
//! One trainer serves universal-policy training (μ-conditioned inputs),
//! Robust (observation only), Hist (observation history), Oracle (fixed
//! target dynamics), and the fine-tuning of any of them under a target
//! sample budget.

mod gae;
mod rollout;

pub use gae::{compute_gae, normalize_advantages};
pub use rollout::{collect_rollouts, EpisodeSlice, MuSource, RolloutBatch};

use serde::{Deserialize, Serialize};

use crate::envs::{Environment, MuSpec};
use crate::error::{Error, Result};
use crate::nn::{clip_global_norm, gaussian_entropy, gaussian_log_prob};
use crate::{Adam, Mlp};
use crate::policies::{InputMode, InputPipeline, PolicyNet};
use crate::rng::Rng;
use crate::LabRng;

/// Hyperparameters. The paper-scale preset mirrors the cited training
/// protocol; the desk preset is the same algorithm at a size that finishes in
/// minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub iterations: usize,
    pub steps_per_iteration: usize,
    pub clip_epsilon: f64,
    pub discount: f64,
    pub gae_lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub learning_rate: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub grad_clip: f64,
}

impl PpoConfig {
    /// Desk-scale source training: 100 iterations × 4,000 steps.
    pub fn desk() -> Self {
        PpoConfig {
            iterations: 100,
            steps_per_iteration: 4_000,
            clip_epsilon: 0.2,
            discount: 0.99,
            gae_lambda: 0.95,
            epochs: 10,
            minibatch_size: 64,
            learning_rate: 3e-4,
            entropy_coef: 0.0,
            value_coef: 0.5,
            grad_clip: 0.5,
        }
    }

    /// Full-scale source training: 500 iterations × 40,000 steps.
    pub fn paper() -> Self {
        PpoConfig {
            iterations: 500,
            steps_per_iteration: 40_000,
            ..Self::desk()
        }
    }

    /// Target fine-tuning: 2,000 steps per iteration.
    pub fn finetune() -> Self {
        PpoConfig {
            steps_per_iteration: 2_000,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return Err(Error::config("clip_epsilon must lie in (0, 1)"));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::config("discount must lie in (0, 1]"));
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return Err(Error::config("gae_lambda must lie in (0, 1]"));
        }
        if self.minibatch_size == 0 || self.epochs == 0 || self.steps_per_iteration == 0 {
            return Err(Error::config("ppo sizes must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateDiagnostics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub policy_grad_norm: f64,
}

/// One training-curve row.
#[derive(Debug, Clone, Copy)]
pub struct TrainRecord {
    pub iteration: usize,
    pub env_steps: u64,
    pub mean_return: f64,
    pub episodes: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// A trained policy bundle: the policy, its value net, how inputs are
/// assembled, and the training curve.
#[derive(Debug, Clone)]
pub struct Trained {
    pub policy: PolicyNet,
    pub value: Mlp,
    pub input_mode: InputMode,
    pub curve: Vec<TrainRecord>,
    pub env_steps: u64,
}

/// Optimizer pair over (policy trunk + log-std) and the value net.
pub struct PpoOptimizer {
    policy_opt: Adam,
    value_opt: Adam,
    scratch_params: Vec<f64>,
    scratch_grads: Vec<f64>,
}

impl PpoOptimizer {
    pub fn new(policy: &PolicyNet, value: &Mlp, lr: f64) -> Self {
        let n = policy.mlp.n_params() + policy.head.log_std.len();
        PpoOptimizer {
            policy_opt: Adam::new(n, lr),
            value_opt: Adam::new(value.n_params(), lr),
            scratch_params: vec![0.0; n],
            scratch_grads: vec![0.0; n],
        }
    }
}

/// Clipped-surrogate update over the whole batch: `epochs` passes of shuffled
/// minibatches. `advantages` must already be normalized.
#[allow(clippy::too_many_arguments)]
pub fn ppo_update(
    policy: &mut PolicyNet,
    value: &mut Mlp,
    opt: &mut PpoOptimizer,
    batch: &RolloutBatch,
    advantages: &[f64],
    returns: &[f64],
    config: &PpoConfig,
    rng: &mut LabRng,
) -> Result<UpdateDiagnostics> {
    config.validate()?;
    let n = batch.len();
    if n == 0 {
        return Err(Error::config("empty batch"));
    }
    let act_dim = policy.action_dim();
    let n_mlp = policy.mlp.n_params();
    let eps = config.clip_epsilon;
    let mut diag = UpdateDiagnostics::default();
    let mut n_minibatches = 0usize;
    let mut order: Vec<usize> = (0..n).collect();

    for _epoch in 0..config.epochs {
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(config.minibatch_size) {
            let b = chunk.len() as f64;
            let mut policy_grad = vec![0.0; n_mlp + act_dim];
            let mut value_grad = value.zero_grad();
            let mut policy_loss = 0.0;
            let mut value_loss = 0.0;
            let mut clipped = 0usize;
            let log_std = policy.head.clamped();
            let sigma2: Vec<f64> = log_std.iter().map(|l| (2.0 * l).exp()).collect();
            for &i in chunk {
                let x = &batch.inputs[i];
                let a = &batch.actions[i];
                let adv = advantages[i];
                let (mean, cache) = policy.mlp.forward_cached(x)?;
                let new_lp = gaussian_log_prob(&mean, &log_std, a)?;
                let ratio = (new_lp - batch.log_probs[i]).exp();
                let surr1 = ratio * adv;
                let surr2 = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
                policy_loss -= surr1.min(surr2) / b;
                if (ratio - 1.0).abs() > eps {
                    clipped += 1;
                }
                // Gradient flows only while the unclipped branch is active.
                let active = !((adv >= 0.0 && ratio > 1.0 + eps)
                    || (adv <= 0.0 && ratio < 1.0 - eps));
                if active {
                    let f = -ratio * adv / b; // dL/d new_lp
                    let mean_grad: Vec<f64> = (0..act_dim)
                        .map(|j| f * (a[j] - mean[j]) / sigma2[j])
                        .collect();
                    policy.mlp.backward(&cache, &mean_grad, &mut policy_grad[..n_mlp])?;
                    for j in 0..act_dim {
                        let z2 = (a[j] - mean[j]) * (a[j] - mean[j]) / sigma2[j];
                        policy_grad[n_mlp + j] += f * (z2 - 1.0);
                    }
                }
                // Entropy bonus only touches log-std.
                for j in 0..act_dim {
                    policy_grad[n_mlp + j] -= config.entropy_coef / b;
                }
                // Value regression.
                let (v, vcache) = value.forward_cached(x)?;
                let err = v[0] - returns[i];
                value_loss += config.value_coef * err * err / b;
                value.backward(
                    &vcache,
                    &[2.0 * config.value_coef * err / b],
                    &mut value_grad,
                )?;
            }
            if !policy_loss.is_finite() || !value_loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "ppo losses: policy {policy_loss}, value {value_loss}"
                )));
            }
            let gnorm = clip_global_norm(&mut policy_grad, config.grad_clip);
            clip_global_norm(&mut value_grad, config.grad_clip);

            // Adam over the concatenated (trunk, log-std) vector.
            opt.scratch_params[..n_mlp].copy_from_slice(policy.mlp.params());
            opt.scratch_params[n_mlp..].copy_from_slice(&policy.head.log_std);
            opt.scratch_grads.copy_from_slice(&policy_grad);
            let scratch_grads = std::mem::take(&mut opt.scratch_grads);
            opt.policy_opt.step(&mut opt.scratch_params, &scratch_grads)?;
            opt.scratch_grads = scratch_grads;
            policy.mlp.params_mut().copy_from_slice(&opt.scratch_params[..n_mlp]);
            policy.head.log_std.copy_from_slice(&opt.scratch_params[n_mlp..]);
            opt.value_opt.step(value.params_mut(), &value_grad)?;

            diag.policy_loss += policy_loss;
            diag.value_loss += value_loss;
            diag.clip_fraction += clipped as f64 / b;
            diag.policy_grad_norm += gnorm;
            n_minibatches += 1;
        }
    }
    let m = n_minibatches.max(1) as f64;
    diag.policy_loss /= m;
    diag.value_loss /= m;
    diag.clip_fraction /= m;
    diag.policy_grad_norm /= m;
    diag.entropy = gaussian_entropy(&policy.head.clamped());
    Ok(diag)
}

/// Per-step advantages/returns for a whole batch, advantages normalized.
pub fn batch_advantages(batch: &RolloutBatch, config: &PpoConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut advantages = vec![0.0; batch.len()];
    let mut returns = vec![0.0; batch.len()];
    for e in &batch.episodes {
        let r = &batch.rewards[e.start..e.start + e.len];
        let v = &batch.values[e.start..e.start + e.len];
        let (adv, ret) = compute_gae(
            r,
            v,
            e.terminal,
            e.bootstrap,
            config.discount,
            config.gae_lambda,
        )?;
        advantages[e.start..e.start + e.len].copy_from_slice(&adv);
        returns[e.start..e.start + e.len].copy_from_slice(&ret);
    }
    normalize_advantages(&mut advantages);
    Ok((advantages, returns))
}

/// Generic PPO training loop: repeatedly collect, estimate advantages,
/// update. The input mode decides which policy family this trains.
pub fn train_policy<E: Environment>(
    env: &mut E,
    mu_source: &MuSource,
    input_mode: InputMode,
    config: &PpoConfig,
    rng: &mut LabRng,
    mut on_iteration: impl FnMut(&TrainRecord),
) -> Result<Trained> {
    config.validate()?;
    let obs_dim = env.obs_dim();
    let act_dim = env.action_dim();
    let input_dim = input_mode.input_dim(obs_dim);
    let mut policy = PolicyNet::init(input_dim, act_dim, rng)?;
    let mut value = crate::policies::value_net(input_dim, rng)?;
    let mut opt = PpoOptimizer::new(&policy, &value, config.learning_rate);
    let mut pipeline = InputPipeline::new(input_mode, obs_dim);
    let mut trained = Trained {
        policy: policy.clone(),
        value: value.clone(),
        input_mode,
        curve: Vec::with_capacity(config.iterations),
        env_steps: 0,
    };
    for iteration in 0..config.iterations {
        let batch = collect_rollouts(
            &policy,
            &value,
            &mut pipeline,
            env,
            mu_source,
            config.steps_per_iteration,
            rng,
        )?;
        trained.env_steps += batch.len() as u64;
        let (advantages, returns) = batch_advantages(&batch, config)?;
        let diag = ppo_update(
            &mut policy,
            &mut value,
            &mut opt,
            &batch,
            &advantages,
            &returns,
            config,
            rng,
        )?;
        let record = TrainRecord {
            iteration,
            env_steps: trained.env_steps,
            mean_return: batch.mean_episode_return(),
            episodes: batch.episodes.len(),
            policy_loss: diag.policy_loss,
            value_loss: diag.value_loss,
            entropy: diag.entropy,
        };
        on_iteration(&record);
        trained.curve.push(record);
    }
    trained.policy = policy;
    trained.value = value;
    Ok(trained)
}

/// Universal-policy training: π(o, μ) with μ resampled every rollout.
/// dim(μ) = 0 degenerates exactly to Robust training.
pub fn train_universal<E: Environment>(
    env: &mut E,
    mu_spec: &MuSpec,
    config: &PpoConfig,
    rng: &mut LabRng,
    on_iteration: impl FnMut(&TrainRecord),
) -> Result<Trained> {
    train_policy(
        env,
        &MuSource::Resample(mu_spec),
        InputMode::MuConditioned {
            mu_dim: mu_spec.dim(),
        },
        config,
        rng,
        on_iteration,
    )
}

/// Robust baseline: μ-blind policy trained under the same randomization.
pub fn train_robust<E: Environment>(
    env: &mut E,
    mu_spec: &MuSpec,
    config: &PpoConfig,
    rng: &mut LabRng,
    on_iteration: impl FnMut(&TrainRecord),
) -> Result<Trained> {
    train_policy(
        env,
        &MuSource::Resample(mu_spec),
        InputMode::Plain,
        config,
        rng,
        on_iteration,
    )
}

/// Adaptive baseline: feed-forward policy over the last 10 observations.
pub fn train_history<E: Environment>(
    env: &mut E,
    mu_spec: &MuSpec,
    config: &PpoConfig,
    rng: &mut LabRng,
    on_iteration: impl FnMut(&TrainRecord),
) -> Result<Trained> {
    train_policy(
        env,
        &MuSource::Resample(mu_spec),
        InputMode::History {
            h: crate::policies::HISTORY_LEN,
        },
        config,
        rng,
        on_iteration,
    )
}

/// Continue PPO on an already-trained bundle inside the target environment,
/// spending `floor(remaining budget / steps_per_iteration)` iterations. The
/// environment must already be budget-wrapped by the caller; this function
/// sizes its collections to never overdraw.
pub fn finetune<E: Environment>(
    trained: &mut Trained,
    env: &mut E,
    budget_remaining: u64,
    config: &PpoConfig,
    pipeline: &mut InputPipeline,
    mu_source: &MuSource,
    rng: &mut LabRng,
    mut on_iteration: impl FnMut(&TrainRecord),
) -> Result<()> {
    config.validate()?;
    let per_iter = config.steps_per_iteration as u64;
    let iterations = (budget_remaining / per_iter) as usize;
    let mut opt = PpoOptimizer::new(&trained.policy, &trained.value, config.learning_rate);
    for iteration in 0..iterations {
        let batch = rollout::collect_rollouts_capped(
            &trained.policy,
            &trained.value,
            pipeline,
            env,
            mu_source,
            config.steps_per_iteration,
            Some(config.steps_per_iteration),
            rng,
        )?;
        trained.env_steps += batch.len() as u64;
        let (advantages, returns) = batch_advantages(&batch, config)?;
        let diag = ppo_update(
            &mut trained.policy,
            &mut trained.value,
            &mut opt,
            &batch,
            &advantages,
            &returns,
            config,
            rng,
        )?;
        let record = TrainRecord {
            iteration,
            env_steps: trained.env_steps,
            mean_return: batch.mean_episode_return(),
            episodes: batch.episodes.len(),
            policy_loss: diag.policy_loss,
            value_loss: diag.value_loss,
            entropy: diag.entropy,
        };
        on_iteration(&record);
        trained.curve.push(record);
    }
    Ok(())
}
