//! Parameterized micro-environments and composable reality-gap wrappers.
//!
//! Two environments cover the gap taxonomy at desk scale:
//! - `pendulum_x`: contact-free torque-limited swing-up, for fast tests;
//! - `hopper_lite`: a planar spring-leg hopper with flight and stance phases,
//!   where the contact back-end, joint limits, armature, latency, actuator
//!   curve, slope, masses, and foot softness can all differ between source
//!   and target.
//!
//! Determinism per (seed, config, μ, action sequence) is a hard contract, and
//! with the identity [`GapConfig`] a target environment is bit-identical to
//! the source.

pub mod contact;
pub mod dynparams;
pub mod gap;
mod hopper;
mod pendulum;

pub use contact::{contact_force_soft, contact_impulse_hard, ContactForce, ContactImpulse};
pub use dynparams::{DynParams, MuSpec};
pub use gap::{
    actuator_apply, gravity_vector, ActionQueue, ActuatorModel, ContactBackend, GapConfig,
    JointLimitMode, SoftFoot,
};
pub use hopper::{HopperLite, DIM2, DIM5, DIM6};
pub use pendulum::PendulumX;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::LabRng;

/// Vector of sensor readings exposed to policies. Excludes μ and the latency
/// queue: dynamics can be identified only through motion.
pub type Observation = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    PendulumX,
    HopperLite,
}

impl EnvKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnvKind::PendulumX => "pendulum_x",
            EnvKind::HopperLite => "hopper_lite",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pendulum_x" => Ok(EnvKind::PendulumX),
            "hopper_lite" => Ok(EnvKind::HopperLite),
            other => Err(Error::config(format!(
                "unknown env_kind '{other}' (expected pendulum_x or hopper_lite)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Per-step task reward.
    Dense,
    /// Zero per step; distance traveled granted at episode end (fall or
    /// horizon). hopper_lite only.
    SparseDistance,
}

/// Full environment description: dynamics layout, integration, gap set,
/// randomized μ dimensions, and episode bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub kind: EnvKind,
    /// Inner integration step (s).
    pub dt_sim: f64,
    /// Sub-integrations per control step.
    pub substeps: u32,
    pub gap: GapConfig,
    /// Names of the randomized μ dimensions (subset of the kind's catalog).
    pub active_params: Vec<String>,
    /// Episode step cap, enforced by rollout/eval loops.
    pub horizon: u32,
    pub discount: f64,
    /// Half-width of the uniform perturbation of the initial state.
    pub init_noise: f64,
    pub reward_mode: RewardMode,
}

impl EnvConfig {
    pub fn pendulum_x() -> Self {
        EnvConfig {
            kind: EnvKind::PendulumX,
            dt_sim: 0.01,
            substeps: 1,
            gap: GapConfig::identity(),
            active_params: pendulum::CATALOG.iter().map(|d| d.name.into()).collect(),
            horizon: 200,
            discount: 0.99,
            init_noise: 0.1,
            reward_mode: RewardMode::Dense,
        }
    }

    pub fn hopper_lite() -> Self {
        EnvConfig {
            kind: EnvKind::HopperLite,
            dt_sim: 0.002,
            substeps: 4,
            gap: GapConfig::identity(),
            active_params: hopper::DIM5.iter().map(|s| (*s).into()).collect(),
            horizon: 1000,
            discount: 0.99,
            init_noise: 0.005,
            reward_mode: RewardMode::Dense,
        }
    }

    /// Seconds between successive policy actions.
    pub fn control_period(&self) -> f64 {
        self.dt_sim * self.substeps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_sim > 0.0) {
            return Err(Error::config("dt_sim must be > 0"));
        }
        if self.substeps == 0 {
            return Err(Error::config("substeps must be ≥ 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be ≥ 1"));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::config("discount must lie in (0, 1]"));
        }
        if self.init_noise < 0.0 {
            return Err(Error::config("init_noise must be ≥ 0"));
        }
        if self.reward_mode == RewardMode::SparseDistance && self.kind != EnvKind::HopperLite {
            return Err(Error::config(
                "sparse_distance reward is defined for hopper_lite only",
            ));
        }
        self.gap.validate(body_count(self.kind))?;
        let catalog = catalog(self.kind);
        for name in &self.active_params {
            if !catalog.iter().any(|d| d.name == name) {
                return Err(Error::config(format!(
                    "unknown μ dimension '{name}' for {}",
                    self.kind.as_str()
                )));
            }
        }
        Ok(())
    }

    /// Active randomization set with catalog ranges.
    pub fn mu_spec(&self) -> Result<MuSpec> {
        self.validate()?;
        let catalog = catalog(self.kind);
        let mut names = Vec::new();
        let mut ranges = Vec::new();
        for name in &self.active_params {
            let def = catalog.iter().find(|d| d.name == name).unwrap();
            names.push(def.name.to_string());
            ranges.push((def.lo, def.hi));
        }
        MuSpec::new(names, ranges)
    }
}

/// One catalog entry: a randomizable physical parameter.
#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub nominal: f64,
}

pub fn catalog(kind: EnvKind) -> &'static [ParamDef] {
    match kind {
        EnvKind::PendulumX => pendulum::CATALOG,
        EnvKind::HopperLite => hopper::CATALOG,
    }
}

pub fn body_count(kind: EnvKind) -> usize {
    match kind {
        EnvKind::PendulumX => 1,
        EnvKind::HopperLite => 2,
    }
}

/// Snapshot of everything that evolves during an episode. `q`/`v` layouts are
/// environment-specific (documented on each environment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
    pub action_queue: Vec<Vec<f64>>,
    pub in_contact: bool,
    pub penetration: f64,
    pub last_normal_force: f64,
    pub terminated: bool,
    pub steps: u32,
    /// Torso x at episode start (sparse-distance bookkeeping).
    pub start_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepInfo {
    pub forward_velocity: f64,
    pub in_contact: bool,
    pub normal_force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub info: StepInfo,
}

/// Uniform stepping interface; all policies and training loops drive
/// environments only through this.
pub trait Environment {
    fn kind(&self) -> EnvKind;
    fn config(&self) -> &EnvConfig;
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;

    /// Start an episode under the given μ (validated against the active
    /// ranges). Fills the latency queue with zero actions.
    fn reset(&mut self, mu: &DynParams, rng: &mut LabRng) -> Result<Observation>;

    /// Advance one control step. Rejected after termination until reset.
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;

    fn observation(&self) -> Observation;
    fn state(&self) -> EnvState;
    /// Overwrite the episode state, keeping the μ resolved by the last reset.
    fn set_state(&mut self, state: EnvState) -> Result<()>;
}

/// Concrete environment dispatch.
#[derive(Debug, Clone)]
pub enum LabEnv {
    Pendulum(PendulumX),
    Hopper(HopperLite),
}

impl LabEnv {
    pub fn build(config: EnvConfig) -> Result<LabEnv> {
        config.validate()?;
        Ok(match config.kind {
            EnvKind::PendulumX => LabEnv::Pendulum(PendulumX::new(config)?),
            EnvKind::HopperLite => LabEnv::Hopper(HopperLite::new(config)?),
        })
    }
}

macro_rules! dispatch {
    ($self:ident, $e:ident => $body:expr) => {
        match $self {
            LabEnv::Pendulum($e) => $body,
            LabEnv::Hopper($e) => $body,
        }
    };
}

impl Environment for LabEnv {
    fn kind(&self) -> EnvKind {
        dispatch!(self, e => e.kind())
    }
    fn config(&self) -> &EnvConfig {
        dispatch!(self, e => e.config())
    }
    fn obs_dim(&self) -> usize {
        dispatch!(self, e => e.obs_dim())
    }
    fn action_dim(&self) -> usize {
        dispatch!(self, e => e.action_dim())
    }
    fn reset(&mut self, mu: &DynParams, rng: &mut LabRng) -> Result<Observation> {
        dispatch!(self, e => e.reset(mu, rng))
    }
    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        dispatch!(self, e => e.step(action))
    }
    fn observation(&self) -> Observation {
        dispatch!(self, e => e.observation())
    }
    fn state(&self) -> EnvState {
        dispatch!(self, e => e.state())
    }
    fn set_state(&mut self, state: EnvState) -> Result<()> {
        dispatch!(self, e => e.set_state(state))
    }
}

/// Wrap an angle into [−π, π).
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = x.rem_euclid(two_pi);
    if r >= std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

/// Locomotion reward: forward velocity − 0.001‖a‖² + 1 (alive bonus).
pub fn reward_locomotion(forward_velocity: f64, action: &[f64]) -> f64 {
    let a2: f64 = action.iter().map(|a| a * a).sum();
    forward_velocity - 0.001 * a2 + 1.0
}
