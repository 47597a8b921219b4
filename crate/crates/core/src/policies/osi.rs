//! Online system identification: a supervised regressor from recent motion
//! history to the normalized dynamics parameters that produced it.

use serde::{Deserialize, Serialize};

use super::{HistoryBuffer, HISTORY_LEN, HIDDEN};
use crate::error::{Error, Result};
use crate::{Adam, Mlp};
use crate::rng::Rng;
use crate::LabRng;

/// MLP mapping a flattened history window to μ̂ ∈ [0,1]^N. Past actions are
/// included in the input by default — torque scale and friction are hard to
/// identify without knowing what the motors were told — with an
/// observations-only mode available.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OsiModel {
    mlp: Mlp,
    obs_dim: usize,
    action_dim: usize,
    mu_dim: usize,
    h: usize,
    include_actions: bool,
    /// When set, bypass the network and return this constant (test stub).
    stub: Option<Vec<f64>>,
}

impl OsiModel {
    pub fn init(
        obs_dim: usize,
        action_dim: usize,
        mu_dim: usize,
        include_actions: bool,
        rng: &mut LabRng,
    ) -> Result<Self> {
        let input = Self::input_dim_for(obs_dim, action_dim, HISTORY_LEN, include_actions);
        let sizes = [&[input][..], &HIDDEN[..], &[mu_dim][..]].concat();
        Ok(OsiModel {
            mlp: Mlp::init(&sizes, 1.0, rng)?,
            obs_dim,
            action_dim,
            mu_dim,
            h: HISTORY_LEN,
            include_actions,
            stub: None,
        })
    }

    /// An oracle stand-in that always answers with `mu_norm`.
    pub fn stub_constant(
        obs_dim: usize,
        action_dim: usize,
        mu_dim: usize,
        mu_norm: &[f64],
    ) -> Result<Self> {
        if mu_norm.len() != mu_dim {
            return Err(Error::config("stub μ length mismatch"));
        }
        Ok(OsiModel {
            mlp: Mlp::zeros(&[1, 1])?,
            obs_dim,
            action_dim,
            mu_dim,
            h: HISTORY_LEN,
            include_actions: false,
            stub: Some(mu_norm.to_vec()),
        })
    }

    fn input_dim_for(obs_dim: usize, action_dim: usize, h: usize, include_actions: bool) -> usize {
        if include_actions {
            h * (obs_dim + action_dim)
        } else {
            h * obs_dim
        }
    }

    pub fn input_dim(&self) -> usize {
        Self::input_dim_for(self.obs_dim, self.action_dim, self.h, self.include_actions)
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn mu_dim(&self) -> usize {
        self.mu_dim
    }

    pub fn history_len(&self) -> usize {
        self.h
    }

    pub fn include_actions(&self) -> bool {
        self.include_actions
    }

    /// Interleave the windows into one feature vector: [o, a] per slot,
    /// oldest→newest (actions lag observations by one step).
    pub fn features(&self, obs_hist: &HistoryBuffer, act_hist: &HistoryBuffer) -> Vec<f64> {
        let obs = obs_hist.flatten();
        if !self.include_actions {
            return obs;
        }
        let acts = act_hist.flatten();
        let mut out = Vec::with_capacity(self.input_dim());
        for t in 0..self.h {
            out.extend_from_slice(&obs[t * self.obs_dim..(t + 1) * self.obs_dim]);
            out.extend_from_slice(&acts[t * self.action_dim..(t + 1) * self.action_dim]);
        }
        out
    }

    /// μ̂ clipped into the training box [0,1]^N, so downstream conditioning
    /// stays inside the universal policy's support.
    pub fn estimate(&self, obs_hist: &HistoryBuffer, act_hist: &HistoryBuffer) -> Result<Vec<f64>> {
        if let Some(stub) = &self.stub {
            return Ok(stub.clone());
        }
        let x = self.features(obs_hist, act_hist);
        let raw = self.mlp.forward(&x)?;
        Ok(raw.iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn predict_raw(&self, features: &[f64]) -> Result<Vec<f64>> {
        if let Some(stub) = &self.stub {
            return Ok(stub.clone());
        }
        self.mlp.forward(features)
    }
}

/// Supervised (history window → normalized μ) pairs harvested from universal-
/// policy rollouts where the per-episode μ was recorded.
#[derive(Debug, Clone, Default)]
pub struct OsiDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Vec<f64>>,
}

impl OsiDataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OsiTrainReport {
    pub train_rmse: f64,
    pub holdout_rmse: f64,
    pub epochs: usize,
}

fn rmse(model: &OsiModel, feats: &[Vec<f64>], labels: &[Vec<f64>]) -> f64 {
    let mut se = 0.0;
    let mut n = 0usize;
    for (x, y) in feats.iter().zip(labels.iter()) {
        let p = model.predict_raw(x).expect("shapes fixed");
        for (pi, yi) in p.iter().zip(y.iter()) {
            se += (pi - yi) * (pi - yi);
            n += 1;
        }
    }
    (se / n.max(1) as f64).sqrt()
}

/// Minimize MSE with Adam; 20% of the dataset is held out for the reported
/// RMSE. Deterministic given the RNG.
pub fn osi_train(
    model: &mut OsiModel,
    dataset: &OsiDataset,
    epochs: usize,
    rng: &mut LabRng,
) -> Result<OsiTrainReport> {
    if dataset.is_empty() {
        return Err(Error::config("OSI dataset is empty"));
    }
    if model.stub.is_some() {
        return Err(Error::config("cannot train a stubbed OSI model"));
    }
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    // One shuffle decides the holdout split.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let n_holdout = (n / 5).max(1).min(n - 1);
    let (holdout_idx, train_idx) = order.split_at(n_holdout);
    let train: Vec<usize> = train_idx.to_vec();
    let mut adam = Adam::new(model.mlp.n_params(), 1e-3);
    let minibatch = 64usize;
    let mu_dim = model.mu_dim as f64;
    let mut idx = train.clone();
    for _epoch in 0..epochs {
        for i in (1..idx.len()).rev() {
            let j = rng.random_range(0..=i);
            idx.swap(i, j);
        }
        for chunk in idx.chunks(minibatch) {
            let mut grad = model.mlp.zero_grad();
            for &i in chunk {
                let (pred, cache) = model.mlp.forward_cached(&dataset.features[i])?;
                let og: Vec<f64> = pred
                    .iter()
                    .zip(dataset.labels[i].iter())
                    .map(|(p, y)| 2.0 * (p - y) / (chunk.len() as f64 * mu_dim))
                    .collect();
                model.mlp.backward(&cache, &og, &mut grad)?;
            }
            adam.step(model.mlp.params_mut(), &grad)?;
        }
    }
    let train_feats: Vec<Vec<f64>> = train.iter().map(|&i| dataset.features[i].clone()).collect();
    let train_labels: Vec<Vec<f64>> = train.iter().map(|&i| dataset.labels[i].clone()).collect();
    let ho_feats: Vec<Vec<f64>> = holdout_idx
        .iter()
        .map(|&i| dataset.features[i].clone())
        .collect();
    let ho_labels: Vec<Vec<f64>> = holdout_idx
        .iter()
        .map(|&i| dataset.labels[i].clone())
        .collect();
    Ok(OsiTrainReport {
        train_rmse: rmse(model, &train_feats, &train_labels),
        holdout_rmse: rmse(model, &ho_feats, &ho_labels),
        epochs,
    })
}

/// Roll out the universal policy under per-episode random μ and harvest
/// (history window, true normalized μ) pairs from every step.
pub fn build_osi_dataset(
    up: &super::PolicyNet,
    env: &mut dyn crate::envs::Environment,
    mu_spec: &crate::envs::MuSpec,
    n_episodes: usize,
    include_actions: bool,
    rng: &mut LabRng,
) -> Result<OsiDataset> {
    let obs_dim = env.obs_dim();
    let act_dim = env.action_dim();
    let mut ds = OsiDataset::default();
    let horizon = env.config().horizon;
    // Feature assembly mirrors OsiModel::features.
    let probe = OsiModel {
        mlp: Mlp::zeros(&[1, 1])?,
        obs_dim,
        action_dim: act_dim,
        mu_dim: mu_spec.dim(),
        h: HISTORY_LEN,
        include_actions,
        stub: None,
    };
    for _ in 0..n_episodes {
        let mu = mu_spec.sample(rng);
        let label = mu.normalized();
        let mut obs = env.reset(&mu, rng)?;
        let mut obs_hist = HistoryBuffer::new(HISTORY_LEN, obs_dim);
        let mut act_hist = HistoryBuffer::new(HISTORY_LEN, act_dim);
        for _ in 0..horizon {
            obs_hist.push(&obs);
            ds.features.push(probe.features(&obs_hist, &act_hist));
            ds.labels.push(label.clone());
            let action = super::act_strategy(up, &label, &obs, false, rng)?;
            act_hist.push(&action);
            let r = env.step(&action)?;
            obs = r.observation;
            if r.terminated {
                break;
            }
        }
    }
    Ok(ds)
}

/// RMSE of always answering the box midpoint — the no-information baseline
/// any useful identifier must beat.
pub fn midpoint_rmse(labels: &[Vec<f64>]) -> f64 {
    let mut se = 0.0;
    let mut n = 0usize;
    for y in labels {
        for yi in y {
            se += (yi - 0.5) * (yi - 0.5);
            n += 1;
        }
    }
    (se / n.max(1) as f64).sqrt()
}
