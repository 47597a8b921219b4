//! The four policy families behind one uniform acting interface: strategies
//! instantiated from a universal policy, the μ-blind robust policy, the
//! history-input adaptive policy, and UPOSI (universal policy + online system
//! identification).

mod osi;

pub use osi::{build_osi_dataset, osi_train, OsiDataset, OsiModel, OsiTrainReport};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{gaussian_log_prob, gaussian_sample};
use crate::{GaussianHead, Mlp};
use crate::LabRng;

/// History length of the adaptive baseline and the OSI model.
pub const HISTORY_LEN: usize = 10;

/// Hidden trunk shared by every network in the lab.
pub const HIDDEN: [usize; 3] = [64, 64, 64];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Universal,
    Robust,
    History,
    Uposi,
    Oracle,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Universal => "universal",
            PolicyKind::Robust => "robust",
            PolicyKind::History => "history",
            PolicyKind::Uposi => "uposi",
            PolicyKind::Oracle => "oracle",
        }
    }
}

/// How raw observations become policy inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Current observation only.
    Plain,
    /// concat(observation, normalized μ).
    MuConditioned { mu_dim: usize },
    /// Flattened ring buffer of the last h observations.
    History { h: usize },
    /// concat(observation, μ̂) with μ̂ re-estimated every step by an OSI
    /// model; same width as `MuConditioned`.
    Uposi { mu_dim: usize },
}

impl InputMode {
    pub fn input_dim(&self, obs_dim: usize) -> usize {
        match self {
            InputMode::Plain => obs_dim,
            InputMode::MuConditioned { mu_dim } | InputMode::Uposi { mu_dim } => {
                obs_dim + mu_dim
            }
            InputMode::History { h } => obs_dim * h,
        }
    }
}

/// Gaussian policy: a tanh trunk producing the action mean, plus a learned
/// state-independent log-std.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyNet {
    pub mlp: Mlp,
    pub head: GaussianHead,
}

impl PolicyNet {
    pub fn init(input_dim: usize, action_dim: usize, rng: &mut LabRng) -> Result<Self> {
        let sizes = [
            &[input_dim][..],
            &HIDDEN[..],
            &[action_dim][..],
        ]
        .concat();
        Ok(PolicyNet {
            mlp: Mlp::init(&sizes, 0.01, rng)?,
            head: GaussianHead::new(action_dim, 0.0),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.mlp.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.mlp.output_dim()
    }

    /// Mean action (the deterministic choice).
    pub fn act_mean(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.mlp.forward(input)
    }

    /// Stochastic action with its log-probability.
    pub fn act_sample(&self, input: &[f64], rng: &mut LabRng) -> Result<(Vec<f64>, f64)> {
        let mean = self.mlp.forward(input)?;
        let ls = self.head.clamped();
        let action = gaussian_sample(&mean, &ls, rng)?;
        let lp = gaussian_log_prob(&mean, &ls, &action)?;
        Ok((action, lp))
    }

    pub fn log_prob(&self, input: &[f64], action: &[f64]) -> Result<f64> {
        let mean = self.mlp.forward(input)?;
        gaussian_log_prob(&mean, &self.head.clamped(), action)
    }
}

/// Value function: same trunk shape, scalar output, unit output gain.
pub fn value_net(input_dim: usize, rng: &mut LabRng) -> Result<Mlp> {
    let sizes = [&[input_dim][..], &HIDDEN[..], &[1][..]].concat();
    Mlp::init(&sizes, 1.0, rng)
}

/// Fixed-length ring of the most recent vectors, zero-padded until filled,
/// flattened oldest→newest.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    slots: VecDeque<Vec<f64>>,
    width: usize,
    h: usize,
}

impl HistoryBuffer {
    pub fn new(h: usize, width: usize) -> Self {
        HistoryBuffer {
            slots: (0..h).map(|_| vec![0.0; width]).collect(),
            width,
            h,
        }
    }

    pub fn clear(&mut self) {
        for s in self.slots.iter_mut() {
            s.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn push(&mut self, item: &[f64]) {
        debug_assert_eq!(item.len(), self.width);
        self.slots.pop_front();
        self.slots.push_back(item.to_vec());
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.h * self.width);
        for s in &self.slots {
            out.extend_from_slice(s);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.h
    }

    pub fn is_empty(&self) -> bool {
        self.h == 0
    }
}

/// Stateful input assembly shared by training and evaluation: one of these
/// per acting stream. For `MuConditioned`, the conditioning vector is set per
/// episode (true μ during training, searched μ at transfer time); for
/// `Uposi`, an OSI model estimates it from history every step.
#[derive(Debug, Clone)]
pub struct InputPipeline {
    mode: InputMode,
    hist: Option<HistoryBuffer>,
    mu_norm: Vec<f64>,
    osi: Option<(OsiModel, HistoryBuffer, HistoryBuffer)>,
}

impl InputPipeline {
    pub fn new(mode: InputMode, obs_dim: usize) -> Self {
        assert!(
            !matches!(mode, InputMode::Uposi { .. }),
            "Uposi pipelines need an OSI model; use new_uposi"
        );
        let hist = match mode {
            InputMode::History { h } => Some(HistoryBuffer::new(h, obs_dim)),
            _ => None,
        };
        InputPipeline {
            mode,
            hist,
            mu_norm: vec![],
            osi: None,
        }
    }

    pub fn new_uposi(osi: OsiModel) -> Self {
        let obs_hist = HistoryBuffer::new(osi.history_len(), osi.obs_dim());
        let act_hist = HistoryBuffer::new(osi.history_len(), osi.action_dim());
        InputPipeline {
            mode: InputMode::Uposi {
                mu_dim: osi.mu_dim(),
            },
            hist: None,
            mu_norm: vec![],
            osi: Some((osi, obs_hist, act_hist)),
        }
    }

    pub fn mode(&self) -> InputMode {
        self.mode
    }

    /// Begin an episode; for μ-conditioned policies, fix the conditioning.
    pub fn reset(&mut self, mu_norm: &[f64]) {
        if let Some(h) = &mut self.hist {
            h.clear();
        }
        if let Some((_, oh, ah)) = &mut self.osi {
            oh.clear();
            ah.clear();
        }
        self.mu_norm = mu_norm.to_vec();
    }

    /// Consume the new observation, produce the policy input.
    pub fn assemble(&mut self, obs: &[f64]) -> Vec<f64> {
        match self.mode {
            InputMode::Plain => obs.to_vec(),
            InputMode::MuConditioned { .. } => {
                let mut v = Vec::with_capacity(obs.len() + self.mu_norm.len());
                v.extend_from_slice(obs);
                v.extend_from_slice(&self.mu_norm);
                v
            }
            InputMode::History { .. } => {
                let h = self.hist.as_mut().expect("history buffer");
                h.push(obs);
                h.flatten()
            }
            InputMode::Uposi { .. } => {
                let (osi, oh, ah) = self.osi.as_mut().expect("osi model");
                oh.push(obs);
                let mu_hat = osi.estimate(oh, ah).expect("osi shapes fixed");
                let mut v = Vec::with_capacity(obs.len() + mu_hat.len());
                v.extend_from_slice(obs);
                v.extend_from_slice(&mu_hat);
                v
            }
        }
    }

    /// Tell the pipeline which action was taken (OSI history needs it).
    pub fn record_action(&mut self, action: &[f64]) {
        if let Some((_, _, ah)) = &mut self.osi {
            ah.push(action);
        }
    }
}

/// One uniform acting surface over all policy families. Evaluation code
/// resets, then alternates `act` with environment steps; the per-kind
/// differences live entirely in context assembly here.
#[derive(Debug, Clone)]
pub enum ActingPolicy {
    /// Universal policy instantiated at a fixed normalized μ — a strategy.
    Strategy {
        net: PolicyNet,
        mu_norm: Vec<f64>,
    },
    /// Observation-only policy (Robust and Oracle checkpoints act this way).
    Reactive { net: PolicyNet },
    /// Feed-forward policy over a 10-observation history.
    History {
        net: PolicyNet,
        buffer: HistoryBuffer,
    },
    /// Universal policy fed μ̂ re-estimated every step by the OSI model.
    Uposi {
        net: PolicyNet,
        osi: OsiModel,
        obs_hist: HistoryBuffer,
        act_hist: HistoryBuffer,
    },
}

impl ActingPolicy {
    pub fn strategy(up: &PolicyNet, mu_norm: &[f64]) -> Self {
        ActingPolicy::Strategy {
            net: up.clone(),
            mu_norm: mu_norm.to_vec(),
        }
    }

    pub fn reactive(net: &PolicyNet) -> Self {
        ActingPolicy::Reactive { net: net.clone() }
    }

    pub fn history(net: &PolicyNet, obs_dim: usize) -> Self {
        ActingPolicy::History {
            net: net.clone(),
            buffer: HistoryBuffer::new(HISTORY_LEN, obs_dim),
        }
    }

    pub fn uposi(up: &PolicyNet, osi: &OsiModel) -> Self {
        ActingPolicy::Uposi {
            net: up.clone(),
            osi: osi.clone(),
            obs_hist: HistoryBuffer::new(osi.history_len(), osi.obs_dim()),
            act_hist: HistoryBuffer::new(osi.history_len(), osi.action_dim()),
        }
    }

    /// Clear per-episode state (history buffers).
    pub fn begin_episode(&mut self) {
        match self {
            ActingPolicy::Strategy { .. } | ActingPolicy::Reactive { .. } => {}
            ActingPolicy::History { buffer, .. } => buffer.clear(),
            ActingPolicy::Uposi {
                obs_hist, act_hist, ..
            } => {
                obs_hist.clear();
                act_hist.clear();
            }
        }
    }

    /// Choose an action for the current observation. `rng` is only consulted
    /// when `deterministic` is false.
    pub fn act(
        &mut self,
        obs: &[f64],
        deterministic: bool,
        rng: &mut LabRng,
    ) -> Result<Vec<f64>> {
        let (net, input) = match self {
            ActingPolicy::Strategy { net, mu_norm } => {
                let mut input = obs.to_vec();
                input.extend_from_slice(mu_norm);
                (net, input)
            }
            ActingPolicy::Reactive { net } => (net, obs.to_vec()),
            ActingPolicy::History { net, buffer } => {
                buffer.push(obs);
                (net, buffer.flatten())
            }
            ActingPolicy::Uposi {
                net,
                osi,
                obs_hist,
                act_hist,
            } => {
                obs_hist.push(obs);
                let mu_hat = osi.estimate(obs_hist, act_hist)?;
                let mut input = obs.to_vec();
                input.extend_from_slice(&mu_hat);
                (net, input)
            }
        };
        let action = if deterministic {
            net.act_mean(&input)?
        } else {
            net.act_sample(&input, rng)?.0
        };
        if let ActingPolicy::Uposi { act_hist, .. } = self {
            act_hist.push(&action);
        }
        Ok(action)
    }

    /// The μ̂ a UPOSI actor would use right now (diagnostics).
    pub fn current_estimate(&self) -> Option<Vec<f64>> {
        match self {
            ActingPolicy::Uposi {
                osi,
                obs_hist,
                act_hist,
                ..
            } => osi.estimate(obs_hist, act_hist).ok(),
            ActingPolicy::Strategy { mu_norm, .. } => Some(mu_norm.clone()),
            _ => None,
        }
    }
}

/// Strategy instantiation as a plain function: UP forward on
/// concat(obs, μ_normalized).
pub fn act_strategy(
    up: &PolicyNet,
    mu_norm: &[f64],
    obs: &[f64],
    deterministic: bool,
    rng: &mut LabRng,
) -> Result<Vec<f64>> {
    for &u in mu_norm {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::config(format!(
                "normalized μ entry {u} outside [0, 1]"
            )));
        }
    }
    let mut input = obs.to_vec();
    input.extend_from_slice(mu_norm);
    if deterministic {
        up.act_mean(&input)
    } else {
        Ok(up.act_sample(&input, rng)?.0)
    }
}
