//! Ground-contact resolution for a point foot, in two styles: velocity-level
//! impulses with exact non-penetration (LCP-like), and a complementarity-free
//! penalty force where impulse grows with penetration depth.

/// Below this approach speed an impact is treated as perfectly inelastic;
/// applying restitution to the tiny per-substep velocities of resting contact
/// would inject jitter.
pub const RESTITUTION_SPEED_THRESHOLD: f64 = 0.1;

/// Width of the tangential-velocity smoothing of the penalty friction model.
pub const FRICTION_SMOOTHING: f64 = 0.01;

/// Impulse on the foot, decomposed along the contact normal and tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactImpulse {
    pub normal: f64,
    pub tangential: f64,
}

impl ContactImpulse {
    pub const ZERO: ContactImpulse = ContactImpulse {
        normal: 0.0,
        tangential: 0.0,
    };
}

/// Velocity-level resolution of a single point contact.
///
/// The normal impulse sets the post-impact normal velocity to
/// −restitution · (approach velocity); restitution is only applied above
/// [`RESTITUTION_SPEED_THRESHOLD`]. The tangential impulse opposes slip and is
/// capped by the friction cone |j_t| ≤ μ j_n; within the cone the contact
/// sticks. Position projection onto the surface is the caller's job.
pub fn contact_impulse_hard(
    mass: f64,
    normal_velocity: f64,
    tangential_velocity: f64,
    friction: f64,
    restitution: f64,
) -> ContactImpulse {
    if normal_velocity >= 0.0 {
        return ContactImpulse::ZERO;
    }
    let approach = -normal_velocity;
    let e = if approach > RESTITUTION_SPEED_THRESHOLD {
        restitution
    } else {
        0.0
    };
    let jn = mass * (1.0 + e) * approach;
    let stop = mass * tangential_velocity.abs();
    let jt_mag = stop.min(friction * jn);
    ContactImpulse {
        normal: jn,
        tangential: -tangential_velocity.signum() * jt_mag,
    }
}

/// Force on the foot, decomposed along the contact normal and tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactForce {
    pub normal: f64,
    pub tangential: f64,
}

impl ContactForce {
    pub const ZERO: ContactForce = ContactForce {
        normal: 0.0,
        tangential: 0.0,
    };
}

/// Penalty contact: f_n = max(0, k·d + c·ḋ) with d the penetration depth and
/// ḋ its rate; never adhesive. Tangential force is Coulomb friction smoothed
/// over [`FRICTION_SMOOTHING`] m/s of slip.
pub fn contact_force_soft(
    penetration: f64,
    penetration_rate: f64,
    tangential_velocity: f64,
    stiffness: f64,
    damping: f64,
    friction: f64,
) -> ContactForce {
    debug_assert!(penetration >= 0.0);
    let fn_ = (stiffness * penetration + damping * penetration_rate).max(0.0);
    let smooth = (tangential_velocity / FRICTION_SMOOTHING).tanh();
    ContactForce {
        normal: fn_,
        tangential: -friction * fn_ * smooth,
    }
}
