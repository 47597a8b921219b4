//! `hopper_lite`: planar spring-leg hopper.
//!
//! Two point masses — a torso and a foot — joined by a massless actuated leg:
//! an axial spring (rest length ℓ₀) in series with a thrust force, and a hip
//! torque realized as an equal-and-opposite tangential force pair. Flight is
//! ballistic for both bodies; stance resolves ground contact at the foot
//! through the configured back-end.
//!
//! State layout: q = [x_t, z_t, x_f, z_f], v = [ẋ_t, ż_t, ẋ_f, ż_f].
//! Leg coordinates are derived: θ = atan2(x_f−x_t, z_t−z_f) (0 = foot below
//! torso, positive = foot in front), ℓ = ‖foot − torso‖.
//!
//! Actions: [hip torque command, leg thrust command], each in [−1, 1].
//! Observation (11): z, ż, ẋ, θ, θ̇, ℓ, ℓ̇, contact flag, sin θ, cos θ,
//! last normal force · 0.01.
//! Reward: ẋ − 0.001‖a‖² + 1. Terminates when the torso drops below
//! 0.45·nominal height or |θ| > 1 rad.

use super::contact::{contact_force_soft, contact_impulse_hard};
use super::gap::{
    actuator_apply, soft_limit_torque, ActionQueue, ContactBackend, JointLimitMode,
};
use super::{
    catalog, reward_locomotion, DynParams, EnvConfig, EnvKind, EnvState, Environment,
    Observation, ParamDef, RewardMode, StepInfo, StepResult,
};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::LabRng;

pub const LEG_REST_LENGTH: f64 = 0.5;
pub const TORSO_MASS: f64 = 3.0;
pub const FOOT_MASS: f64 = 0.5;
pub const LEG_STIFFNESS: f64 = 300.0;
/// Peak hip torque at unit torque scale (N·m).
pub const HIP_GAIN: f64 = 6.0;
/// Peak leg thrust at unit torque scale (N).
pub const THRUST_GAIN: f64 = 60.0;
/// Per-unit-damping coefficients of the two actuated coordinates.
const HIP_DAMPING: f64 = 0.3;
const AXIAL_DAMPING: f64 = 3.0;
/// Nominal joint limits: |θ| ≤ 0.9 rad, ℓ ∈ ℓ₀ ± 0.2 m.
const THETA_LIMIT: f64 = 0.9;
const LENGTH_HALF_RANGE: f64 = 0.2;
/// Standing torso height; falls are z < 0.45 of this.
pub const NOMINAL_HEIGHT: f64 = LEG_REST_LENGTH;
const FALL_HEIGHT_FRACTION: f64 = 0.45;
const THETA_TERMINATION: f64 = 1.0;
/// Initial hover: foot this far above ground, leg at rest length.
const DROP_HEIGHT: f64 = 0.05;

pub(super) const CATALOG: &[ParamDef] = &[
    ParamDef { name: "friction", lo: 0.2, hi: 1.0, nominal: 0.6 },
    ParamDef { name: "restitution", lo: 0.0, hi: 0.3, nominal: 0.15 },
    ParamDef { name: "foot_mass", lo: 0.4, hi: 3.0, nominal: 1.0 },
    ParamDef { name: "torso_mass", lo: 0.4, hi: 3.0, nominal: 1.0 },
    ParamDef { name: "joint_damping", lo: 0.5, hi: 3.0, nominal: 1.0 },
    ParamDef { name: "torque_scale", lo: 0.5, hi: 1.5, nominal: 1.0 },
];

/// dim(μ) presets mirroring the randomization tiers.
pub const DIM2: [&str; 2] = ["foot_mass", "restitution"];
pub const DIM5: [&str; 5] = [
    "foot_mass",
    "restitution",
    "friction",
    "torso_mass",
    "torque_scale",
];
pub const DIM6: [&str; 6] = [
    "foot_mass",
    "restitution",
    "friction",
    "torso_mass",
    "torque_scale",
    "joint_damping",
];

#[derive(Debug, Clone, Copy)]
struct Resolved {
    friction: f64,
    restitution: f64,
    m_torso: f64,
    m_foot: f64,
    damping: f64,
    torque_scale: f64,
}

impl Default for Resolved {
    fn default() -> Self {
        Resolved {
            friction: 0.6,
            restitution: 0.15,
            m_torso: TORSO_MASS,
            m_foot: FOOT_MASS,
            damping: 1.0,
            torque_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HopperLite {
    config: EnvConfig,
    dyn_: Resolved,
    // Torso and foot states.
    xt: f64,
    zt: f64,
    xf: f64,
    zf: f64,
    vxt: f64,
    vzt: f64,
    vxf: f64,
    vzf: f64,
    time: f64,
    steps: u32,
    terminated: bool,
    in_contact: bool,
    penetration: f64,
    last_normal_force: f64,
    start_x: f64,
    queue: ActionQueue,
    gravity: [f64; 2],
}

impl HopperLite {
    pub fn new(config: EnvConfig) -> Result<Self> {
        if config.kind != EnvKind::HopperLite {
            return Err(Error::config("config kind is not hopper_lite"));
        }
        let queue = ActionQueue::new(config.gap.latency, config.control_period(), 2);
        let gravity = super::gravity_vector(config.gap.slope_angle);
        Ok(HopperLite {
            config,
            dyn_: Resolved::default(),
            xt: 0.0,
            zt: NOMINAL_HEIGHT + DROP_HEIGHT,
            xf: 0.0,
            zf: DROP_HEIGHT,
            vxt: 0.0,
            vzt: 0.0,
            vxf: 0.0,
            vzf: 0.0,
            time: 0.0,
            steps: 0,
            terminated: false,
            in_contact: false,
            penetration: 0.0,
            last_normal_force: 0.0,
            start_x: 0.0,
            queue,
            gravity,
        })
    }

    fn resolve(&self, mu: &DynParams) -> Resolved {
        let nom = |name: &str| {
            catalog(EnvKind::HopperLite)
                .iter()
                .find(|d| d.name == name)
                .unwrap()
                .nominal
        };
        let get = |name: &str| mu.get(name).unwrap_or_else(|| nom(name));
        let gap = &self.config.gap;
        Resolved {
            friction: get("friction"),
            restitution: get("restitution"),
            m_torso: TORSO_MASS * get("torso_mass") * gap.mass_scale(0),
            m_foot: FOOT_MASS * get("foot_mass") * gap.mass_scale(1),
            damping: get("joint_damping"),
            torque_scale: get("torque_scale"),
        }
    }

    /// Leg geometry: (ℓ, θ, axial unit u torso→foot, tangent t̂, ℓ̇, θ̇).
    fn leg(&self) -> (f64, f64, [f64; 2], [f64; 2], f64, f64) {
        let dx = self.xf - self.xt;
        let dz = self.zf - self.zt;
        let l = (dx * dx + dz * dz).sqrt().max(1e-9);
        let theta = dx.atan2(-dz);
        let u = [dx / l, dz / l];
        let t = [-dz / l, dx / l]; // +90° from u: equals (cos θ, sin θ)
        let rvx = self.vxf - self.vxt;
        let rvz = self.vzf - self.vzt;
        let ldot = rvx * u[0] + rvz * u[1];
        let thetadot = (rvx * t[0] + rvz * t[1]) / l;
        (l, theta, u, t, ldot, thetadot)
    }

    /// Total mechanical energy: kinetic + gravitational (w.r.t. the active
    /// gravity vector) + axial spring.
    pub fn mechanical_energy(&self) -> f64 {
        let d = &self.dyn_;
        let ke = 0.5 * d.m_torso * (self.vxt * self.vxt + self.vzt * self.vzt)
            + 0.5 * d.m_foot * (self.vxf * self.vxf + self.vzf * self.vzf);
        let pe = -d.m_torso * (self.gravity[0] * self.xt + self.gravity[1] * self.zt)
            - d.m_foot * (self.gravity[0] * self.xf + self.gravity[1] * self.zf);
        let (l, _, _, _, _, _) = self.leg();
        let spring = 0.5 * LEG_STIFFNESS * (l - LEG_REST_LENGTH) * (l - LEG_REST_LENGTH);
        ke + pe + spring
    }

    fn joint_limits(&self) -> (f64, f64, f64) {
        let s = self.config.gap.joint_limit_scale;
        let theta_max = THETA_LIMIT * s;
        let l_lo = LEG_REST_LENGTH - LENGTH_HALF_RANGE * s;
        let l_hi = LEG_REST_LENGTH + LENGTH_HALF_RANGE * s;
        (theta_max, l_lo.max(0.05), l_hi)
    }

    fn substep(&mut self, tau_cmd: f64, thrust_cmd: f64) {
        let d = self.dyn_;
        let gap = &self.config.gap;
        let dt = self.config.dt_sim;
        let (l, theta, u, t, ldot, thetadot) = self.leg();
        let (theta_max, l_lo, l_hi) = self.joint_limits();
        let m_red = d.m_torso * d.m_foot / (d.m_torso + d.m_foot);

        // Forces on the foot and torso, gravity first.
        let mut f_foot = [d.m_foot * self.gravity[0], d.m_foot * self.gravity[1]];
        let mut f_torso = [d.m_torso * self.gravity[0], d.m_torso * self.gravity[1]];

        // Axial: passive spring plus the motorized thrust/damping path, the
        // latter shunted by armature (added inertia on the actuated
        // coordinate absorbs part of the joint-space force).
        let spring = -LEG_STIFFNESS * (l - LEG_REST_LENGTH);
        let axial_joint = thrust_cmd - AXIAL_DAMPING * d.damping * ldot;
        let s_ax = if gap.armature > 0.0 {
            m_red / (m_red + gap.armature)
        } else {
            1.0
        };
        let mut axial = spring + s_ax * axial_joint;
        if gap.joint_limit_mode == JointLimitMode::Soft {
            axial += soft_limit_torque(l, l_lo, l_hi);
        }

        // Hip: actuated torque and damping, shunted likewise; soft limit
        // torque is structural and bypasses the shunt.
        let hip_inertia = m_red * l * l;
        let s_hip = if gap.armature > 0.0 {
            hip_inertia / (hip_inertia + gap.armature)
        } else {
            1.0
        };
        let mut tau = s_hip * (tau_cmd - HIP_DAMPING * d.damping * thetadot);
        if gap.joint_limit_mode == JointLimitMode::Soft {
            tau += soft_limit_torque(theta, -theta_max, theta_max);
        }

        let f_tan = tau / l;
        f_foot[0] += axial * u[0] + f_tan * t[0];
        f_foot[1] += axial * u[1] + f_tan * t[1];
        f_torso[0] -= axial * u[0] + f_tan * t[0];
        f_torso[1] -= axial * u[1] + f_tan * t[1];

        // Penalty contact acts as a force; pick the path.
        let penalty = if let Some(sf) = gap.soft_foot {
            Some((sf.stiffness, sf.damping))
        } else if gap.contact_backend == ContactBackend::Soft {
            Some((gap.contact_stiffness, gap.contact_damping))
        } else {
            None
        };
        if let Some((k, c)) = penalty {
            let depth = (-self.zf).max(0.0);
            if depth > 0.0 {
                let rate = -self.vzf;
                let f = contact_force_soft(depth, rate, self.vxf, k, c, d.friction);
                f_foot[0] += f.tangential;
                f_foot[1] += f.normal;
                self.last_normal_force = f.normal;
            }
        }

        // Semi-implicit Euler: velocities first.
        self.vxt += dt * f_torso[0] / d.m_torso;
        self.vzt += dt * f_torso[1] / d.m_torso;
        self.vxf += dt * f_foot[0] / d.m_foot;
        self.vzf += dt * f_foot[1] / d.m_foot;

        // Impulse contact: resolve at velocity level while the foot is on or
        // below the surface.
        if penalty.is_none() && self.zf <= 0.0 && self.vzf < 0.0 {
            let j = contact_impulse_hard(d.m_foot, self.vzf, self.vxf, d.friction, d.restitution);
            self.vzf += j.normal / d.m_foot;
            self.vxf += j.tangential / d.m_foot;
            self.last_normal_force = j.normal / dt;
        }

        // Positions.
        self.xt += dt * self.vxt;
        self.zt += dt * self.vzt;
        self.xf += dt * self.vxf;
        self.zf += dt * self.vzf;

        // Hard joint limits: clamp the offending leg coordinate, zero its
        // rate, rebuild the foot state around the torso.
        if gap.joint_limit_mode == JointLimitMode::Hard {
            let (l2, th2, _, _, ld2, thd2) = self.leg();
            let mut l_c = l2;
            let mut th_c = th2;
            let mut ld_c = ld2;
            let mut thd_c = thd2;
            let mut hit = false;
            if th_c > theta_max {
                th_c = theta_max;
                thd_c = 0.0;
                hit = true;
            } else if th_c < -theta_max {
                th_c = -theta_max;
                thd_c = 0.0;
                hit = true;
            }
            if l_c > l_hi {
                l_c = l_hi;
                ld_c = 0.0;
                hit = true;
            } else if l_c < l_lo {
                l_c = l_lo;
                ld_c = 0.0;
                hit = true;
            }
            if hit {
                let (s, c) = th_c.sin_cos();
                self.xf = self.xt + l_c * s;
                self.zf = self.zt - l_c * c;
                let u2 = [s, -c];
                let t2 = [c, s];
                self.vxf = self.vxt + ld_c * u2[0] + l_c * thd_c * t2[0];
                self.vzf = self.vzt + ld_c * u2[1] + l_c * thd_c * t2[1];
            }
        }

        // Non-penetration projection for the impulse back-end. The contact
        // flag is sticky across the control step (set here, cleared in
        // `step`): a touchdown between two observations stays visible.
        if penalty.is_none() {
            if self.zf < 0.0 {
                self.zf = 0.0;
            }
            self.in_contact |= self.zf <= 0.0;
            self.penetration = 0.0;
        } else {
            self.penetration = (-self.zf).max(0.0);
            self.in_contact |= self.penetration > 0.0;
        }

        self.time += dt;
    }
}

impl Environment for HopperLite {
    fn kind(&self) -> EnvKind {
        EnvKind::HopperLite
    }

    fn config(&self) -> &EnvConfig {
        &self.config
    }

    fn obs_dim(&self) -> usize {
        11
    }

    fn action_dim(&self) -> usize {
        2
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
        let noise = |rng: &mut LabRng| if w > 0.0 { rng.random_range(-w..w) } else { 0.0 };
        self.xt = noise(rng);
        self.zt = NOMINAL_HEIGHT + DROP_HEIGHT + noise(rng);
        self.xf = self.xt + noise(rng);
        self.zf = DROP_HEIGHT + noise(rng);
        self.vxt = noise(rng);
        self.vzt = noise(rng);
        self.vxf = self.vxt + noise(rng);
        self.vzf = self.vzt + noise(rng);
        self.time = 0.0;
        self.steps = 0;
        self.terminated = false;
        self.in_contact = false;
        self.penetration = 0.0;
        self.last_normal_force = 0.0;
        self.start_x = self.xt;
        self.queue = ActionQueue::new(self.config.gap.latency, self.config.control_period(), 2);
        self.gravity = super::gravity_vector(self.config.gap.slope_angle);
        Ok(self.observation())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if self.terminated {
            return Err(Error::protocol("step after termination; reset first"));
        }
        if action.len() != 2 {
            return Err(Error::config(format!(
                "action has {} dims, expected 2",
                action.len()
            )));
        }
        let cmd = [action[0].clamp(-1.0, 1.0), action[1].clamp(-1.0, 1.0)];
        let applied = self.queue.push_pop(cmd.to_vec());
        let gain = self.dyn_.torque_scale;
        let model = self.config.gap.actuator_model;
        let tau = actuator_apply(applied[0], model, HIP_GAIN * gain);
        let thrust = actuator_apply(applied[1], model, THRUST_GAIN * gain);
        self.in_contact = false;
        self.last_normal_force = 0.0;
        for _ in 0..self.config.substeps {
            self.substep(tau, thrust);
        }
        self.steps += 1;

        let (_, theta, _, _, _, _) = self.leg();
        let fell = self.zt < FALL_HEIGHT_FRACTION * NOMINAL_HEIGHT
            || theta.abs() > THETA_TERMINATION;
        let horizon_end = self.steps >= self.config.horizon;
        self.terminated = fell;

        let reward = match self.config.reward_mode {
            RewardMode::Dense => reward_locomotion(self.vxt, &cmd),
            RewardMode::SparseDistance => {
                if fell || horizon_end {
                    self.xt - self.start_x
                } else {
                    0.0
                }
            }
        };
        Ok(StepResult {
            observation: self.observation(),
            reward,
            terminated: fell,
            info: StepInfo {
                forward_velocity: self.vxt,
                in_contact: self.in_contact,
                normal_force: self.last_normal_force,
            },
        })
    }

    fn observation(&self) -> Observation {
        let (l, theta, _, _, ldot, thetadot) = self.leg();
        vec![
            self.zt,
            self.vzt,
            self.vxt,
            theta,
            thetadot,
            l,
            ldot,
            if self.in_contact { 1.0 } else { 0.0 },
            theta.sin(),
            theta.cos(),
            self.last_normal_force * 0.01,
        ]
    }

    fn state(&self) -> EnvState {
        EnvState {
            q: vec![self.xt, self.zt, self.xf, self.zf],
            v: vec![self.vxt, self.vzt, self.vxf, self.vzf],
            time: self.time,
            action_queue: self.queue.snapshot(),
            in_contact: self.in_contact,
            penetration: self.penetration,
            last_normal_force: self.last_normal_force,
            terminated: self.terminated,
            steps: self.steps,
            start_x: self.start_x,
        }
    }

    fn set_state(&mut self, state: EnvState) -> Result<()> {
        if state.q.len() != 4 || state.v.len() != 4 {
            return Err(Error::config(
                "hopper state is q=[x_t,z_t,x_f,z_f], v likewise",
            ));
        }
        self.xt = state.q[0];
        self.zt = state.q[1];
        self.xf = state.q[2];
        self.zf = state.q[3];
        self.vxt = state.v[0];
        self.vzt = state.v[1];
        self.vxf = state.v[2];
        self.vzf = state.v[3];
        self.time = state.time;
        self.steps = state.steps;
        self.terminated = state.terminated;
        self.in_contact = state.in_contact;
        self.penetration = state.penetration;
        self.last_normal_force = state.last_normal_force;
        self.start_x = state.start_x;
        self.queue.restore(state.action_queue);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::gap::GapConfig;
    use crate::rng::seeded;

    fn nominal_mu(cfg: &EnvConfig) -> DynParams {
        let spec = cfg.mu_spec().unwrap();
        let values = spec
            .names
            .iter()
            .map(|n| CATALOG.iter().find(|d| d.name == n).unwrap().nominal)
            .collect();
        spec.with_values(values).unwrap()
    }

    fn flight_state(env: &HopperLite) -> EnvState {
        let mut s = env.state();
        // High ballistic arc, leg at rest length, zero relative motion: the
        // only force is gravity, so the audit isolates the integrator.
        s.q = vec![0.0, 5.0, 0.0, 4.5];
        s.v = vec![1.5, 2.0, 1.5, 2.0];
        s
    }

    #[test]
    fn observation_is_11d() {
        let env = HopperLite::new(EnvConfig::hopper_lite()).unwrap();
        assert_eq!(env.observation().len(), 11);
        assert_eq!(env.obs_dim(), 11);
    }

    #[test]
    fn ballistic_flight_loses_g_dt_per_step() {
        let cfg = EnvConfig::hopper_lite();
        let mut env = HopperLite::new(cfg.clone()).unwrap();
        env.reset(&nominal_mu(&cfg), &mut seeded(0)).unwrap();
        env.set_state(flight_state(&env)).unwrap();
        let vz0 = env.state().v[1];
        env.step(&[0.0, 0.0]).unwrap();
        let vz1 = env.state().v[1];
        let dvz = vz0 - vz1;
        let expect = crate::envs::gap::GRAVITY * cfg.control_period();
        assert!((dvz - expect).abs() < 1e-9, "Δż {dvz} vs {expect}");
    }

    #[test]
    fn flight_energy_drift_below_tolerance() {
        let cfg = EnvConfig::hopper_lite();
        let mut env = HopperLite::new(cfg.clone()).unwrap();
        env.reset(&nominal_mu(&cfg), &mut seeded(0)).unwrap();
        env.set_state(flight_state(&env)).unwrap();
        let e0 = env.mechanical_energy();
        // 100 sim substeps = 25 control steps at 4 substeps each.
        for _ in 0..25 {
            env.step(&[0.0, 0.0]).unwrap();
        }
        let e1 = env.mechanical_energy();
        let drift = ((e1 - e0) / e0).abs();
        assert!(drift < 0.001, "energy drift {drift} over 100 substeps");
    }

    #[test]
    fn drop_settles_without_penetration() {
        let mut cfg = EnvConfig::hopper_lite();
        cfg.init_noise = 0.0;
        let spec = cfg.mu_spec().unwrap();
        // Zero restitution, high friction.
        let mu = spec
            .with_values(vec![1.0, 0.0, 1.0, 1.0, 1.0])
            .unwrap();
        let mut env = HopperLite::new(cfg).unwrap();
        env.reset(&mu, &mut seeded(0)).unwrap();
        for _ in 0..500 {
            let r = env.step(&[0.0, 0.0]).unwrap();
            if r.terminated {
                panic!("hopper fell while settling");
            }
        }
        let s = env.state();
        assert!(s.q[3] >= 0.0, "foot below ground: {}", s.q[3]);
        assert!(s.q[3] < 1e-9, "foot should rest on the ground");
        assert!(s.v[3].abs() < 1e-6, "foot normal velocity {}", s.v[3]);
        // Torso supported by the spring near static compression.
        let expect_z = LEG_REST_LENGTH - TORSO_MASS * 9.81 / LEG_STIFFNESS;
        assert!((s.q[1] - expect_z).abs() < 0.02, "torso z {}", s.q[1]);
    }

    #[test]
    fn restitution_rebounds_foot() {
        let mut cfg = EnvConfig::hopper_lite();
        cfg.init_noise = 0.0;
        let spec = cfg.mu_spec().unwrap();
        let mu = spec
            .with_values(vec![1.0, 0.3, 1.0, 1.0, 1.0])
            .unwrap();
        let mut env = HopperLite::new(cfg).unwrap();
        env.reset(&mu, &mut seeded(0)).unwrap();
        // Drop with the whole assembly moving down at 1 m/s from higher up.
        let mut s = env.state();
        s.q = vec![0.0, 1.0, 0.0, 0.5];
        s.v = vec![0.0, -1.0, 0.0, -1.0];
        env.set_state(s).unwrap();
        let mut max_vzf_after_contact = f64::NEG_INFINITY;
        let mut touched = false;
        for _ in 0..200 {
            let r = env.step(&[0.0, 0.0]).unwrap();
            if r.info.in_contact {
                touched = true;
            }
            if touched {
                max_vzf_after_contact = max_vzf_after_contact.max(env.state().v[3]);
            }
            if r.terminated {
                break;
            }
        }
        assert!(touched);
        // Rebound should be a noticeable fraction of the ~1.4 m/s impact.
        assert!(
            max_vzf_after_contact > 0.2,
            "foot rebound {max_vzf_after_contact}"
        );
    }

    #[test]
    fn trajectories_are_deterministic() {
        let cfg = EnvConfig::hopper_lite();
        let mu = nominal_mu(&cfg);
        let run = || {
            let mut env = HopperLite::new(cfg.clone()).unwrap();
            env.reset(&mu, &mut seeded(42)).unwrap();
            let mut rng = seeded(7);
            let mut states = vec![];
            for _ in 0..200 {
                let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let r = env.step(&a).unwrap();
                states.push(env.state());
                if r.terminated {
                    break;
                }
            }
            states
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn identity_gap_is_bit_identical() {
        let cfg_src = EnvConfig::hopper_lite();
        let mut cfg_tgt = cfg_src.clone();
        cfg_tgt.gap = GapConfig::identity();
        cfg_tgt.gap.mass_scales = vec![1.0, 1.0];
        let mu = nominal_mu(&cfg_src);
        let mut a = HopperLite::new(cfg_src).unwrap();
        let mut b = HopperLite::new(cfg_tgt).unwrap();
        let oa = a.reset(&mu, &mut seeded(11)).unwrap();
        let ob = b.reset(&mu, &mut seeded(11)).unwrap();
        assert_eq!(oa, ob);
        let mut rng = seeded(13);
        for _ in 0..400 {
            let act = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let ra = a.step(&act).unwrap();
            let rb = b.step(&act).unwrap();
            assert_eq!(ra.observation, rb.observation);
            assert_eq!(ra.reward.to_bits(), rb.reward.to_bits());
            assert_eq!(a.state(), b.state());
            if ra.terminated {
                break;
            }
        }
    }

    #[test]
    fn hard_vs_soft_contact_diverges_after_touchdown() {
        let cfg_hard = EnvConfig::hopper_lite();
        let mut cfg_soft = cfg_hard.clone();
        cfg_soft.gap.contact_backend = ContactBackend::Soft;
        let mu = nominal_mu(&cfg_hard);
        let mut hard = HopperLite::new(cfg_hard).unwrap();
        let mut soft = HopperLite::new(cfg_soft).unwrap();
        hard.reset(&mu, &mut seeded(5)).unwrap();
        soft.reset(&mu, &mut seeded(5)).unwrap();
        assert_eq!(hard.state(), soft.state());
        let mut rng = seeded(99);
        let mut prefix_identical = true;
        let mut first_contact: Option<u32> = None;
        let mut diverged = false;
        for i in 0..400u32 {
            let act = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let rh = hard.step(&act);
            let rs = soft.step(&act);
            let (rh, rs) = match (rh, rs) {
                (Ok(a), Ok(b)) => (a, b),
                _ => break, // one of them fell
            };
            if first_contact.is_none() && (rh.info.in_contact || rs.info.in_contact) {
                first_contact = Some(i);
            }
            if first_contact.is_none() {
                let sa = hard.state();
                let sb = soft.state();
                for (x, y) in sa.q.iter().zip(sb.q.iter()) {
                    if (x - y).abs() > 1e-10 {
                        prefix_identical = false;
                    }
                }
            } else {
                let dx = (hard.state().q[0] - soft.state().q[0]).abs();
                if dx > 0.02 {
                    diverged = true;
                }
            }
            if rh.terminated || rs.terminated {
                break;
            }
        }
        assert!(first_contact.is_some(), "no touchdown in 400 steps");
        assert!(prefix_identical, "pre-contact prefix differs");
        assert!(diverged, "hard and soft back-ends did not diverge");
    }

    #[test]
    fn observation_excludes_mu() {
        let cfg = EnvConfig::hopper_lite();
        let spec = cfg.mu_spec().unwrap();
        let mut env = HopperLite::new(cfg).unwrap();
        let mut rng = seeded(3);
        env.reset(
            &spec.with_values(vec![0.5, 0.05, 0.5, 0.5, 0.6]).unwrap(),
            &mut rng,
        )
        .unwrap();
        let frozen = env.state();
        let obs_a = env.observation();
        env.reset(
            &spec.with_values(vec![2.8, 0.29, 0.95, 2.8, 1.45]).unwrap(),
            &mut rng,
        )
        .unwrap();
        env.set_state(frozen).unwrap();
        assert_eq!(obs_a, env.observation());
    }

    #[test]
    fn step_after_termination_is_protocol_error() {
        let mut cfg = EnvConfig::hopper_lite();
        cfg.init_noise = 0.0;
        let mu = nominal_mu(&cfg);
        let mut env = HopperLite::new(cfg).unwrap();
        env.reset(&mu, &mut seeded(0)).unwrap();
        // Force a fall: start the torso below the threshold.
        let mut s = env.state();
        s.q[1] = 0.10;
        s.q[3] = 0.0;
        env.set_state(s).unwrap();
        let r = env.step(&[0.0, 0.0]).unwrap();
        assert!(r.terminated);
        let err = env.step(&[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Protocol(_)));
    }

    #[test]
    fn torque_scale_monotone_in_peak_torque() {
        // Applied torque magnitude is monotone in the torque-scale μ for any
        // fixed command sequence, for both actuator models.
        use crate::envs::gap::ActuatorModel;
        let mut rng = seeded(8);
        for _ in 0..50 {
            let cmd: f64 = rng.random_range(-1.0..1.0);
            let lo: f64 = rng.random_range(0.5..1.0);
            let hi: f64 = rng.random_range(1.0..1.5);
            for model in [ActuatorModel::Linear, ActuatorModel::Piecewise] {
                let t_lo = actuator_apply(cmd, model, HIP_GAIN * lo).abs();
                let t_hi = actuator_apply(cmd, model, HIP_GAIN * hi).abs();
                assert!(t_hi >= t_lo);
            }
        }
    }

    /// A crude hand-tuned hop controller: thrust in stance, swing the leg to
    /// a velocity-dependent touchdown angle in flight. The task must be
    /// achievable by simple feedback or no policy will learn it.
    fn raibert_action(env: &HopperLite, v_target: f64) -> [f64; 2] {
        let (l, theta, _, _, _ldot, thetadot) = env.leg();
        let vx = env.vxt;
        if env.in_contact {
            // Push off and sweep the leg backwards to accelerate the torso.
            let tau = 0.35 * (vx - v_target) - 0.1 * thetadot;
            [tau.clamp(-1.0, 1.0), 1.0]
        } else {
            // Servo the leg to the desired touchdown angle; retract a bit.
            let theta_td = (0.12 * vx + 0.10 * (vx - v_target)).clamp(-0.6, 0.6);
            let tau = 3.0 * (theta_td - theta) - 0.4 * thetadot;
            let thrust = if l > 0.45 { -0.4 } else { 0.2 };
            [tau.clamp(-1.0, 1.0), thrust]
        }
    }

    #[test]
    fn hand_controller_hops_forward() {
        let mut cfg = EnvConfig::hopper_lite();
        cfg.init_noise = 0.0;
        let mu = nominal_mu(&cfg);
        let mut env = HopperLite::new(cfg).unwrap();
        env.reset(&mu, &mut seeded(0)).unwrap();
        let mut steps = 0;
        let mut ret = 0.0;
        for _ in 0..1000 {
            let a = raibert_action(&env, 1.0);
            let r = env.step(&a).unwrap();
            ret += r.reward;
            steps += 1;
            if r.terminated {
                break;
            }
        }
        let traveled = env.state().q[0];
        assert!(
            steps == 1000,
            "hand controller fell at step {steps} (x = {traveled:.2})"
        );
        assert!(traveled > 2.0, "traveled only {traveled:.2} m");
        assert!(ret > 1000.0, "return {ret:.0}");
    }

    #[test]
    fn sparse_reward_grants_distance_at_end() {
        let mut cfg = EnvConfig::hopper_lite();
        cfg.reward_mode = RewardMode::SparseDistance;
        cfg.horizon = 50;
        cfg.init_noise = 0.0;
        let mu = nominal_mu(&cfg);
        let mut env = HopperLite::new(cfg).unwrap();
        env.reset(&mu, &mut seeded(0)).unwrap();
        let mut total = 0.0;
        let mut per_step_rewards = vec![];
        for i in 0..50 {
            let r = env.step(&[0.0, 0.0]).unwrap();
            per_step_rewards.push(r.reward);
            total += r.reward;
            if r.terminated {
                break;
            }
            assert!(i < 50);
        }
        // All reward arrives in the final step.
        let n = per_step_rewards.len();
        assert!(per_step_rewards[..n - 1].iter().all(|&r| r == 0.0));
        let traveled = env.state().q[0] - env.state().start_x;
        assert!((total - traveled).abs() < 1e-12);
    }
}
