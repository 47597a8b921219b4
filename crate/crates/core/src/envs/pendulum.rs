//! `pendulum_x`: torque-limited swing-up, contact-free.
//!
//! State layout: q = [θ] (0 = hanging down, π = upright), v = [ω].
//! Action: one torque command in [−1, 1], scaled by gain · torque_scale.
//! Reward: −(wrap(θ−π)² + 0.1 ω² + 0.001 a²). No termination.

use super::gap::{actuator_apply, ActionQueue, GRAVITY};
use super::{
    catalog, DynParams, EnvConfig, EnvKind, EnvState, Environment, Observation, ParamDef,
    StepInfo, StepResult,
};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::LabRng;

/// Base torque at full command and unit torque scale (N·m).
pub const TORQUE_GAIN: f64 = 2.0;
const NOMINAL_MASS: f64 = 1.0;
const NOMINAL_LENGTH: f64 = 1.0;

pub(super) const CATALOG: &[ParamDef] = &[
    ParamDef { name: "mass_scale", lo: 0.5, hi: 2.0, nominal: 1.0 },
    ParamDef { name: "length_scale", lo: 0.5, hi: 2.0, nominal: 1.0 },
    // Nominal (unrandomized) pendulum is undamped.
    ParamDef { name: "damping", lo: 0.05, hi: 0.5, nominal: 0.0 },
    ParamDef { name: "torque_scale", lo: 0.5, hi: 1.5, nominal: 1.0 },
];

#[derive(Debug, Clone, Copy)]
struct Resolved {
    mass: f64,
    length: f64,
    damping: f64,
    torque_scale: f64,
}

#[derive(Debug, Clone)]
pub struct PendulumX {
    config: EnvConfig,
    dyn_: Resolved,
    theta: f64,
    omega: f64,
    time: f64,
    steps: u32,
    terminated: bool,
    queue: ActionQueue,
}

impl PendulumX {
    pub fn new(config: EnvConfig) -> Result<Self> {
        if config.kind != EnvKind::PendulumX {
            return Err(Error::config("config kind is not pendulum_x"));
        }
        let queue = ActionQueue::new(config.gap.latency, config.control_period(), 1);
        Ok(PendulumX {
            config,
            dyn_: Resolved {
                mass: NOMINAL_MASS,
                length: NOMINAL_LENGTH,
                damping: 0.0,
                torque_scale: 1.0,
            },
            theta: 0.0,
            omega: 0.0,
            time: 0.0,
            steps: 0,
            terminated: false,
            queue,
        })
    }

    fn resolve(&self, mu: &DynParams) -> Resolved {
        let nom = |name: &str| {
            catalog(EnvKind::PendulumX)
                .iter()
                .find(|d| d.name == name)
                .unwrap()
                .nominal
        };
        let get = |name: &str| mu.get(name).unwrap_or_else(|| nom(name));
        Resolved {
            mass: NOMINAL_MASS * get("mass_scale") * self.config.gap.mass_scale(0),
            length: NOMINAL_LENGTH * get("length_scale"),
            damping: get("damping"),
            torque_scale: get("torque_scale"),
        }
    }
}

impl Environment for PendulumX {
    fn kind(&self) -> EnvKind {
        EnvKind::PendulumX
    }

    fn config(&self) -> &EnvConfig {
        &self.config
    }

    fn obs_dim(&self) -> usize {
        3
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, mu: &DynParams, rng: &mut LabRng) -> Result<Observation> {
        let spec = self.config.mu_spec()?;
        if mu.dim() != spec.dim() {
            return Err(Error::config(format!(
                "μ has {} dims, active set has {}",
                mu.dim(),
                spec.dim()
            )));
        }
        mu.validate_in_range()?;
        self.dyn_ = self.resolve(mu);
        let w = self.config.init_noise;
        self.theta = if w > 0.0 { rng.random_range(-w..w) } else { 0.0 };
        self.omega = if w > 0.0 { rng.random_range(-w..w) } else { 0.0 };
        self.time = 0.0;
        self.steps = 0;
        self.terminated = false;
        self.queue = ActionQueue::new(self.config.gap.latency, self.config.control_period(), 1);
        Ok(self.observation())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if self.terminated {
            return Err(Error::protocol("step after termination; reset first"));
        }
        if action.len() != 1 {
            return Err(Error::config(format!(
                "action has {} dims, expected 1",
                action.len()
            )));
        }
        let cmd = action[0].clamp(-1.0, 1.0);
        let applied = self.queue.push_pop(vec![cmd]);
        let gain = TORQUE_GAIN * self.dyn_.torque_scale;
        let tau_act = actuator_apply(applied[0], self.config.gap.actuator_model, gain);

        let d = self.dyn_;
        let inertia = d.mass * d.length * d.length;
        // Armature adds inertia on the actuated coordinate; realized as a
        // shunt on the joint-space force path.
        let shunt = if self.config.gap.armature > 0.0 {
            inertia / (inertia + self.config.gap.armature)
        } else {
            1.0
        };
        let dt = self.config.dt_sim;
        for _ in 0..self.config.substeps {
            let tau_joint = tau_act - d.damping * self.omega;
            let gravity_torque = -d.mass * GRAVITY * d.length * self.theta.sin();
            let alpha = (shunt * tau_joint + gravity_torque) / inertia;
            self.omega += dt * alpha;
            self.theta += dt * self.omega;
            self.time += dt;
        }
        self.steps += 1;

        let e = super::wrap_angle(self.theta - std::f64::consts::PI);
        let reward = -(e * e + 0.1 * self.omega * self.omega + 0.001 * cmd * cmd);
        Ok(StepResult {
            observation: self.observation(),
            reward,
            terminated: false,
            info: StepInfo::default(),
        })
    }

    fn observation(&self) -> Observation {
        vec![self.theta.cos(), self.theta.sin(), self.omega]
    }

    fn state(&self) -> EnvState {
        EnvState {
            q: vec![self.theta],
            v: vec![self.omega],
            time: self.time,
            action_queue: self.queue.snapshot(),
            in_contact: false,
            penetration: 0.0,
            last_normal_force: 0.0,
            terminated: self.terminated,
            steps: self.steps,
            start_x: 0.0,
        }
    }

    fn set_state(&mut self, state: EnvState) -> Result<()> {
        if state.q.len() != 1 || state.v.len() != 1 {
            return Err(Error::config("pendulum state is q=[θ], v=[ω]"));
        }
        self.theta = state.q[0];
        self.omega = state.v[0];
        self.time = state.time;
        self.steps = state.steps;
        self.terminated = state.terminated;
        self.queue.restore(state.action_queue);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn nominal_mu(cfg: &EnvConfig) -> DynParams {
        let spec = cfg.mu_spec().unwrap();
        let values = spec
            .names
            .iter()
            .map(|n| {
                CATALOG
                    .iter()
                    .find(|d| d.name == n)
                    .map(|d| 0.5 * (d.lo + d.hi))
                    .unwrap()
            })
            .collect();
        spec.with_values(values).unwrap()
    }

    #[test]
    fn upright_equilibrium_is_stationary() {
        // θ = π, ω = 0, zero action, zero damping: sin π = 0, no torque.
        let mut cfg = EnvConfig::pendulum_x();
        cfg.active_params = vec!["mass_scale".into()]; // damping stays at nominal 0
        let mut env = PendulumX::new(cfg.clone()).unwrap();
        let spec = cfg.mu_spec().unwrap();
        env.reset(&spec.with_values(vec![1.0]).unwrap(), &mut seeded(0))
            .unwrap();
        let mut s = env.state();
        s.q[0] = std::f64::consts::PI;
        s.v[0] = 0.0;
        env.set_state(s).unwrap();
        env.step(&[0.0]).unwrap();
        let s = env.state();
        assert!((s.q[0] - std::f64::consts::PI).abs() < 1e-12);
        assert!(s.v[0].abs() < 1e-12);
    }

    #[test]
    fn zero_noise_reset_hits_nominal_pose() {
        let mut cfg = EnvConfig::pendulum_x();
        cfg.init_noise = 0.0;
        let mut env = PendulumX::new(cfg.clone()).unwrap();
        env.reset(&nominal_mu(&cfg), &mut seeded(1)).unwrap();
        let s = env.state();
        assert_eq!(s.q[0], 0.0);
        assert_eq!(s.v[0], 0.0);
    }

    #[test]
    fn reset_is_seed_deterministic() {
        let cfg = EnvConfig::pendulum_x();
        let mu = nominal_mu(&cfg);
        let mut a = PendulumX::new(cfg.clone()).unwrap();
        let mut b = PendulumX::new(cfg).unwrap();
        let oa = a.reset(&mu, &mut seeded(77)).unwrap();
        let ob = b.reset(&mu, &mut seeded(77)).unwrap();
        assert_eq!(oa, ob);
        assert_eq!(a.state(), b.state());
    }

    #[test]
    fn reset_spread_matches_noise_width() {
        let cfg = EnvConfig::pendulum_x();
        let mu = nominal_mu(&cfg);
        let mut env = PendulumX::new(cfg.clone()).unwrap();
        let mut rng = seeded(5);
        let n = 1000;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sumsq = 0.0;
        for _ in 0..n {
            env.reset(&mu, &mut rng).unwrap();
            let th = env.state().q[0];
            min = min.min(th);
            max = max.max(th);
            sumsq += th * th;
        }
        // Uniform(-w, w): std = w/√3.
        let w = cfg.init_noise;
        let std = (sumsq / n as f64).sqrt();
        let expect = w / 3.0f64.sqrt();
        assert!(min >= -w && max <= w);
        assert!((std - expect).abs() / expect < 0.2, "std {std} vs {expect}");
    }

    #[test]
    fn out_of_range_mu_rejected_with_diagnostic() {
        let cfg = EnvConfig::pendulum_x();
        let spec = cfg.mu_spec().unwrap();
        let mu = spec.with_values(vec![3.0, 1.0, 0.1, 1.0]).unwrap();
        let mut env = PendulumX::new(cfg).unwrap();
        let err = env.reset(&mu, &mut seeded(0)).unwrap_err();
        assert!(err.to_string().contains("mass_scale"));
    }

    #[test]
    fn observation_excludes_mu() {
        // Same state, different μ: identical observation.
        let cfg = EnvConfig::pendulum_x();
        let spec = cfg.mu_spec().unwrap();
        let mut env = PendulumX::new(cfg).unwrap();
        let mut rng = seeded(3);
        env.reset(&spec.with_values(vec![0.6, 0.6, 0.1, 0.6]).unwrap(), &mut rng)
            .unwrap();
        let frozen = env.state();
        let obs_a = env.observation();
        env.reset(&spec.with_values(vec![1.9, 1.9, 0.4, 1.4]).unwrap(), &mut rng)
            .unwrap();
        env.set_state(frozen).unwrap();
        let obs_b = env.observation();
        assert_eq!(obs_a, obs_b);
    }

    #[test]
    fn torque_scale_changes_motion() {
        let cfg = EnvConfig::pendulum_x();
        let spec = cfg.mu_spec().unwrap();
        let mut rng = seeded(1);
        let mut low = PendulumX::new(cfg.clone()).unwrap();
        let mut high = PendulumX::new(cfg).unwrap();
        low.reset(&spec.with_values(vec![1.0, 1.0, 0.1, 0.5]).unwrap(), &mut rng)
            .unwrap();
        let fixed = low.state();
        high.reset(&spec.with_values(vec![1.0, 1.0, 0.1, 1.5]).unwrap(), &mut rng)
            .unwrap();
        high.set_state(fixed.clone()).unwrap();
        low.set_state(fixed).unwrap();
        for _ in 0..10 {
            low.step(&[1.0]).unwrap();
            high.step(&[1.0]).unwrap();
        }
        assert!(high.state().v[0] > low.state().v[0]);
    }
}
