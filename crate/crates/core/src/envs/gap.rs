//! Reality-gap configuration and the individual gap mechanisms: rotated
//! gravity, actuator curves, latency queues, and joint-limit handling.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

/// Restoring stiffness of soft joint limits (per rad or per m of violation).
pub const SOFT_LIMIT_STIFFNESS: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactBackend {
    /// Impulse-based, non-penetrating, exact friction cone.
    Hard,
    /// Penalty-based, complementarity-free: force grows with penetration.
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointLimitMode {
    /// Clamp the coordinate at the limit and zero its velocity.
    Hard,
    /// Permit violation, apply a restoring torque/force.
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuatorModel {
    /// τ = gain · command.
    Linear,
    /// Saturating knee: linear up to |command| = 0.5, slope ratio 0.4 beyond.
    Piecewise,
}

/// Lumped spring-damper stand-in for a deformable foot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftFoot {
    pub stiffness: f64,
    pub damping: f64,
}

impl Default for SoftFoot {
    fn default() -> Self {
        SoftFoot {
            stiffness: 10_000.0,
            damping: 1.0,
        }
    }
}

/// Declarative description of which reality gaps a target environment applies.
/// [`GapConfig::identity`] reproduces the source environment bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub contact_backend: ContactBackend,
    pub joint_limit_mode: JointLimitMode,
    /// Added inertia on each actuated coordinate, ≥ 0.
    pub armature: f64,
    /// Observation→action delay in seconds, rounded to whole control steps.
    pub latency: f64,
    pub actuator_model: ActuatorModel,
    /// Ground slope, expressed by rotating gravity; |angle| ≤ 0.3 rad.
    pub slope_angle: f64,
    /// Per-body mass multipliers (environment order); empty = all 1.
    pub mass_scales: Vec<f64>,
    pub soft_foot: Option<SoftFoot>,
    /// Penalty parameters of the soft contact backend.
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    /// Multiplier on the nominal joint-limit magnitudes.
    pub joint_limit_scale: f64,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self::identity()
    }
}

impl GapConfig {
    /// All gaps off: hard contact, hard limits, no armature/latency/slope,
    /// linear actuator, unit masses, rigid foot.
    pub fn identity() -> Self {
        GapConfig {
            contact_backend: ContactBackend::Hard,
            joint_limit_mode: JointLimitMode::Hard,
            armature: 0.0,
            latency: 0.0,
            actuator_model: ActuatorModel::Linear,
            slope_angle: 0.0,
            mass_scales: vec![],
            soft_foot: None,
            contact_stiffness: 10_000.0,
            contact_damping: 100.0,
            joint_limit_scale: 1.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.contact_backend == ContactBackend::Hard
            && self.joint_limit_mode == JointLimitMode::Hard
            && self.armature == 0.0
            && self.latency == 0.0
            && self.actuator_model == ActuatorModel::Linear
            && self.slope_angle == 0.0
            && self.mass_scales.iter().all(|&s| s == 1.0)
            && self.soft_foot.is_none()
            && self.joint_limit_scale == 1.0
    }

    pub fn validate(&self, n_bodies: usize) -> Result<()> {
        if self.armature < 0.0 || !self.armature.is_finite() {
            return Err(Error::config("armature must be finite and ≥ 0"));
        }
        if self.latency < 0.0 || !self.latency.is_finite() {
            return Err(Error::config("latency must be finite and ≥ 0"));
        }
        if self.slope_angle.abs() > 0.3 {
            return Err(Error::config(format!(
                "slope_angle {} outside [-0.3, 0.3]",
                self.slope_angle
            )));
        }
        if !self.mass_scales.is_empty() && self.mass_scales.len() != n_bodies {
            return Err(Error::config(format!(
                "mass_scales has {} entries for {} bodies",
                self.mass_scales.len(),
                n_bodies
            )));
        }
        if self.mass_scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::config("mass_scales must be positive"));
        }
        if let Some(sf) = &self.soft_foot {
            if !(sf.stiffness > 0.0) {
                return Err(Error::config("soft_foot stiffness must be > 0"));
            }
        }
        if !(self.joint_limit_scale > 0.0) {
            return Err(Error::config("joint_limit_scale must be > 0"));
        }
        Ok(())
    }

    pub fn mass_scale(&self, body: usize) -> f64 {
        self.mass_scales.get(body).copied().unwrap_or(1.0)
    }
}

/// Gravity rotated by the slope angle: (−g sin α, −g cos α).
pub fn gravity_vector(slope_angle: f64) -> [f64; 2] {
    [
        -GRAVITY * slope_angle.sin(),
        -GRAVITY * slope_angle.cos(),
    ]
}

/// Torque/thrust produced by a command in [−1, 1] under the given model.
/// The piecewise curve keeps full slope up to |command| = 0.5, then drops to
/// 0.4 of it — a saturating knee.
pub fn actuator_apply(command: f64, model: ActuatorModel, gain: f64) -> f64 {
    match model {
        ActuatorModel::Linear => gain * command,
        ActuatorModel::Piecewise => {
            let c = command.abs();
            let m = if c <= 0.5 { c } else { 0.5 + 0.4 * (c - 0.5) };
            gain * m * command.signum()
        }
    }
}

/// Restoring torque of a soft joint limit; zero inside the limits.
pub fn soft_limit_torque(q: f64, lo: f64, hi: f64) -> f64 {
    if q > hi {
        -SOFT_LIMIT_STIFFNESS * (q - hi)
    } else if q < lo {
        -SOFT_LIMIT_STIFFNESS * (q - lo)
    } else {
        0.0
    }
}

/// Hard limit: clamp the coordinate and zero its velocity on contact with a
/// limit. Returns (q, qd, hit).
pub fn hard_limit_project(q: f64, qd: f64, lo: f64, hi: f64) -> (f64, f64, bool) {
    if q > hi {
        (hi, 0.0, true)
    } else if q < lo {
        (lo, 0.0, true)
    } else {
        (q, qd, false)
    }
}

/// FIFO action-delay line with whole-control-step granularity.
#[derive(Debug, Clone)]
pub struct ActionQueue {
    queue: VecDeque<Vec<f64>>,
    len: usize,
}

impl ActionQueue {
    /// Queue length = round(latency / control period); length 0 passes
    /// actions straight through.
    pub fn new(latency: f64, control_period: f64, action_dim: usize) -> Self {
        let len = if latency <= 0.0 {
            0
        } else {
            (latency / control_period).round() as usize
        };
        ActionQueue {
            queue: (0..len).map(|_| vec![0.0; action_dim]).collect(),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Enqueue the fresh action, dequeue the one to apply this step.
    pub fn push_pop(&mut self, action: Vec<f64>) -> Vec<f64> {
        if self.len == 0 {
            return action;
        }
        self.queue.push_back(action);
        self.queue.pop_front().expect("queue non-empty")
    }

    pub fn snapshot(&self) -> Vec<Vec<f64>> {
        self.queue.iter().cloned().collect()
    }

    pub fn restore(&mut self, items: Vec<Vec<f64>>) {
        self.len = items.len();
        self.queue = items.into();
    }
}
