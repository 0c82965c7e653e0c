//! Rigid-body plant of the suspended platform.
//!
//! Translation is resolved in the inertial frame and rotation in the body
//! frame:
//!
//! ```text
//! m p̈ − m R S(c) ω̇            = T R e3 + F_t − m g e3 − m R (ω × (ω × c))
//! m S(c) Rᵀ p̈ + I_O ω̇        = M + l e3 × Rᵀ F_t − c × Rᵀ m g e3 − ω × I_O ω
//! ```
//!
//! At `R = I` this is exactly the body-frame Newton–Euler form returned by
//! [`rigid_body_wrench`]. The torso is quasi-static: its mass properties are
//! re-evaluated once per step and joint-rate reactions are neglected.

use nalgebra::{Matrix6, Rotation3, Vector6};

use crate::kinematics::TorsoKinematics;
use crate::math::{self, skew, Vec3};
use crate::model::{self, BodyState, MassSummary, RobotParams, TorsoConfig};
use crate::{Error, Result};

pub const MAX_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vec3,
    /// Torque about the body origin.
    pub torque: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetherParams {
    pub anchor: Vec3,
    pub counterweight_mass: f64,
    pub attach_height: f64,
}

impl TetherParams {
    pub fn from_params(params: &RobotParams) -> Self {
        TetherParams {
            anchor: params.tether.anchor,
            counterweight_mass: params.tether.counterweight_mass,
            attach_height: params.l,
        }
    }

    /// No cable (free flight).
    pub fn detached(attach_height: f64) -> Self {
        TetherParams {
            anchor: Vec3::zeros(),
            counterweight_mass: 0.0,
            attach_height,
        }
    }

    pub fn attachment_point(&self, p: &Vec3, r: &Rotation3<f64>) -> Vec3 {
        p + r * Vec3::new(0.0, 0.0, self.attach_height)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlantInputs {
    /// Total thrust along body z, N.
    pub thrust: f64,
    /// Body moment, N·m.
    pub moment: Vec3,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SaturationFlags {
    pub thrust: bool,
    pub moment: bool,
}

impl PlantInputs {
    /// Clamps thrust to `[0, thrust_max]` and each moment axis to `±moment_max`.
    pub fn saturate(&self, thrust_max: f64, moment_max: f64) -> (PlantInputs, SaturationFlags) {
        let thrust = self.thrust.clamp(0.0, thrust_max);
        let moment = self.moment.map(|m| m.clamp(-moment_max, moment_max));
        let flags = SaturationFlags {
            thrust: thrust != self.thrust,
            moment: moment != self.moment,
        };
        (PlantInputs { thrust, moment }, flags)
    }
}

/// Constant-magnitude cable force pulling the attachment point toward the anchor.
pub fn tether_force(state: &BodyState, tether: &TetherParams, g: f64) -> Result<Vec3> {
    tether_force_at(&state.p, &state.rotation, tether, g)
}

fn tether_force_at(p: &Vec3, r: &Rotation3<f64>, tether: &TetherParams, g: f64) -> Result<Vec3> {
    if tether.counterweight_mass == 0.0 {
        return Ok(Vec3::zeros());
    }
    let cable = tether.anchor - tether.attachment_point(p, r);
    let len = cable.norm();
    if !(len > 1e-12) {
        return Err(Error::DegenerateTether);
    }
    Ok(cable * (tether.counterweight_mass * g / len))
}

/// Body-frame Newton–Euler wrench required for the given motion.
pub fn rigid_body_wrench(summary: &MassSummary, omega: &Vec3, pddot: &Vec3, omegadot: &Vec3) -> Wrench {
    let m = summary.mass;
    let s_c = skew(&summary.com);
    let s_w = skew(omega);
    Wrench {
        force: m * pddot - m * s_c * omegadot - m * s_w.transpose() * s_w * summary.com,
        torque: m * s_c * pddot + summary.inertia * omegadot + s_w * summary.inertia * omega,
    }
}

struct RigidState {
    rotation: Rotation3<f64>,
    omega: Vec3,
}

/// Assembles the coupled 6×6 system `A (p̈, ω̇) = b`.
fn equations(
    x: &RigidState,
    summary: &MassSummary,
    u: &PlantInputs,
    f_t: &Vec3,
    g: f64,
    l: f64,
) -> (Matrix6<f64>, Vector6<f64>) {
    let m = summary.mass;
    let c = &summary.com;
    let r = x.rotation.matrix();
    let s_c = skew(c);
    let e3 = Vec3::z();

    let mut a = Matrix6::zeros();
    a.fixed_view_mut::<3, 3>(0, 0).fill_diagonal(m);
    a.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-m * r * s_c));
    a.fixed_view_mut::<3, 3>(3, 0).copy_from(&(m * s_c * r.transpose()));
    a.fixed_view_mut::<3, 3>(3, 3).copy_from(&summary.inertia);

    let w = &x.omega;
    let force = r * e3 * u.thrust + f_t - e3 * (m * g) - r * w.cross(&w.cross(c)) * m;
    let torque = u.moment + (e3 * l).cross(&(r.transpose() * f_t))
        - c.cross(&(r.transpose() * e3 * (m * g)))
        - w.cross(&(summary.inertia * w));

    let mut b = Vector6::zeros();
    b.fixed_rows_mut::<3>(0).copy_from(&force);
    b.fixed_rows_mut::<3>(3).copy_from(&torque);
    (a, b)
}

fn solve_accelerations(
    x: &RigidState,
    summary: &MassSummary,
    u: &PlantInputs,
    f_t: &Vec3,
    g: f64,
    l: f64,
) -> Result<(Vec3, Vec3)> {
    let (a, b) = equations(x, summary, u, f_t, g, l);
    let sol = a.lu().solve(&b).ok_or(Error::SingularInertia)?;
    Ok((sol.fixed_rows::<3>(0).into_owned(), sol.fixed_rows::<3>(3).into_owned()))
}

/// Inertial linear acceleration of the body origin and body angular acceleration.
pub fn accelerations(
    state: &BodyState,
    summary: &MassSummary,
    u: &PlantInputs,
    f_t: &Vec3,
    params: &RobotParams,
) -> Result<(Vec3, Vec3)> {
    let x = RigidState {
        rotation: state.rotation,
        omega: state.omega,
    };
    solve_accelerations(&x, summary, u, f_t, params.g, params.l)
}

/// RKMK stage variables: the rotation is `R_n exp(S(sigma))`.
#[derive(Clone, Copy)]
struct Stage {
    p: Vec3,
    v: Vec3,
    sigma: Vec3,
    omega: Vec3,
}

impl Stage {
    fn axpy(&self, h: f64, d: &Stage) -> Stage {
        Stage {
            p: self.p + d.p * h,
            v: self.v + d.v * h,
            sigma: self.sigma + d.sigma * h,
            omega: self.omega + d.omega * h,
        }
    }
}

/// Owns the chains and constants needed to advance the plant.
#[derive(Debug, Clone)]
pub struct Plant {
    pub params: RobotParams,
    pub tether: TetherParams,
    kin: TorsoKinematics,
}

impl Plant {
    pub fn new(params: RobotParams, tether: TetherParams) -> Self {
        let kin = TorsoKinematics::from_params(&params);
        Plant { params, tether, kin }
    }

    pub fn kinematics(&self) -> &TorsoKinematics {
        &self.kin
    }

    pub fn mass_summary(&self, torso: &TorsoConfig) -> MassSummary {
        model::mass_summary_with(&self.kin, &self.params, torso)
    }

    pub fn tether_force(&self, state: &BodyState) -> Result<Vec3> {
        tether_force(state, &self.tether, self.params.g)
    }

    fn derivative(&self, base: &Rotation3<f64>, x: &Stage, summary: &MassSummary, u: &PlantInputs) -> Result<Stage> {
        let rotation = base * Rotation3::new(x.sigma);
        let f_t = tether_force_at(&x.p, &rotation, &self.tether, self.params.g)?;
        let rs = RigidState {
            rotation,
            omega: x.omega,
        };
        let (pdd, wd) = solve_accelerations(&rs, summary, u, &f_t, self.params.g, self.tether.attach_height)?;
        // inverse right-trivialized dexp, truncated after the second bracket (enough for order 4)
        let s = &x.sigma;
        let w = &x.omega;
        let sigma_dot = w + s.cross(w) * 0.5 + s.cross(&s.cross(w)) / 12.0;
        Ok(Stage {
            p: x.v,
            v: pdd,
            sigma: sigma_dot,
            omega: wd,
        })
    }

    /// One RK4 (Munthe-Kaas) step of the rigid floating base with fixed mass properties.
    pub fn integrate_rigid(&self, state: &BodyState, summary: &MassSummary, u: &PlantInputs, dt: f64) -> Result<BodyState> {
        let base = state.rotation;
        let x0 = Stage {
            p: state.p,
            v: state.v,
            sigma: Vec3::zeros(),
            omega: state.omega,
        };
        let k1 = self.derivative(&base, &x0, summary, u)?;
        let k2 = self.derivative(&base, &x0.axpy(dt / 2.0, &k1), summary, u)?;
        let k3 = self.derivative(&base, &x0.axpy(dt / 2.0, &k2), summary, u)?;
        let k4 = self.derivative(&base, &x0.axpy(dt, &k3), summary, u)?;
        let x1 = x0
            .axpy(dt / 6.0, &k1)
            .axpy(dt / 3.0, &k2)
            .axpy(dt / 3.0, &k3)
            .axpy(dt / 6.0, &k4);

        let mut next = state.clone();
        next.p = x1.p;
        next.v = x1.v;
        next.omega = x1.omega;
        next.set_rotation(math::orthonormalize(&(base * Rotation3::new(x1.sigma))));
        if !next.is_finite() {
            return Err(Error::NonFinite("rigid-body integration produced NaN/inf".into()));
        }
        Ok(next)
    }

    /// Advances the plant by `dt`: rigid body first (mass properties of the
    /// torso at the start of the step), then the torso joints lag toward `torso_cmd`.
    pub fn step(&self, state: &BodyState, u: &PlantInputs, torso_cmd: &TorsoConfig, dt: f64) -> Result<BodyState> {
        if !(dt > 0.0 && dt <= MAX_STEP) {
            return Err(Error::InvalidParameter(format!("step size {dt} outside (0, {MAX_STEP}]")));
        }
        if !torso_cmd.is_finite() || !u.thrust.is_finite() || !u.moment.iter().all(|m| m.is_finite()) {
            return Err(Error::NonFinite("plant inputs are not finite".into()));
        }
        let summary = self.mass_summary(&state.torso);
        let mut next = self.integrate_rigid(state, &summary, u, dt)?;
        let tau = self.params.joint_time_constant;
        let alpha = 1.0 - (-dt / tau).exp();
        next.torso = state.torso.zip_map(torso_cmd, |q, c| q + alpha * (c - q));
        next.torso_rate = next.torso.zip_map(torso_cmd, |q, c| (c - q) / tau);
        Ok(next)
    }
}

/// Convenience wrapper around [`Plant::step`].
pub fn step(
    state: &BodyState,
    u: &PlantInputs,
    torso_cmd: &TorsoConfig,
    dt: f64,
    params: &RobotParams,
    tether: &TetherParams,
) -> Result<BodyState> {
    Plant::new(params.clone(), *tether).step(state, u, torso_cmd, dt)
}
