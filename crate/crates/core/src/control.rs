//! Whole-body outer loop, the autopilot rate loop it drives, the
//! CoM-unaware baseline, and the torso inverse kinematics.

use nalgebra::{Matrix2, Matrix3, Rotation3, SMatrix, SVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::kinematics::Chain;
use crate::math::{self, Mat3, Vec3};
use crate::model::{BodyState, MassSummary, RobotParams, ARM_DOF, HEAD_DOF};
use crate::transmission::{JointVector, MotorVector, TendonConfigMatrix};
use crate::{Error, Result};

pub type ArmJoints = [f64; ARM_DOF];
pub type HeadJoints = [f64; HEAD_DOF];

/// Diagonal gains of the altitude, attitude and autopilot rate loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlGains {
    /// Altitude damping, 1/s.
    pub b1: f64,
    /// Altitude stiffness, 1/s².
    pub k1: f64,
    /// Attitude damping (diagonal of B2).
    pub b2: Vec3,
    /// Attitude stiffness (diagonal of K2).
    pub k2: Vec3,
    /// Autopilot rate gain (diagonal of b_Φ), N·m·s/rad.
    pub b_phi: Vec3,
}

impl ControlGains {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, ok) in [
            ("b1", self.b1 > 0.0),
            ("k1", self.k1 > 0.0),
            ("b2", self.b2.iter().all(|&x| x > 0.0)),
            ("k2", self.k2.iter().all(|&x| x > 0.0)),
            ("b_phi", self.b_phi.iter().all(|&x| x > 0.0)),
        ] {
            if !ok {
                out.push(format!("gains.{name} must be positive"));
            }
        }
        out
    }
}

/// Form of the gravity-torque compensation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompensationMode {
    /// `c × m g e3`, the small-angle form.
    Printed,
    /// `c × Rᵀ m g e3` using the measured attitude.
    RotationExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub compensation: CompensationMode,
    /// Roll/pitch magnitude beyond which the attitude error is clamped, rad.
    pub linearization_guard: f64,
    /// Pitch clamp used by the inverse Euler-rate map, rad.
    pub euler_rate_guard: f64,
}

impl ControlConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.linearization_guard > 0.0) {
            out.push("control.linearization_guard must be positive".into());
        }
        if !(self.euler_rate_guard > 0.0 && self.euler_rate_guard < std::f64::consts::FRAC_PI_2) {
            out.push("control.euler_rate_guard must lie in (0, pi/2)".into());
        }
        out
    }
}

/// Inverse-kinematics parameters as stored in the parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IkParams {
    /// Diagonal of the task gain K, 1/s.
    pub gain: Vec3,
    /// Diagonal of the joint weight W.
    pub weights: ArmJoints,
    pub damping: f64,
    /// Integration step, s.
    pub dt: f64,
    /// Proportional gain of the head loop, 1/s.
    pub head_gain: f64,
}

impl IkParams {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.gain.iter().all(|&k| k > 0.0) {
            out.push("ik.gain must be positive".into());
        }
        if !self.weights.iter().all(|&w| w > 0.0) {
            out.push("ik.weights must be positive".into());
        }
        if !(self.damping >= 0.0) {
            out.push("ik.damping must be non-negative".into());
        }
        if !(self.dt > 0.0) {
            out.push("ik.dt must be positive".into());
        }
        if !(self.head_gain > 0.0) {
            out.push("ik.head_gain must be positive".into());
        }
        out
    }

    pub fn settings(&self) -> IkSettings {
        IkSettings {
            k: Matrix3::from_diagonal(&self.gain),
            w: SMatrix::<f64, 5, 5>::from_diagonal(&SVector::from(self.weights)),
            dt: self.dt,
            damping: self.damping,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkSettings {
    pub k: Mat3,
    pub w: SMatrix<f64, ARM_DOF, ARM_DOF>,
    pub dt: f64,
    pub damping: f64,
}

impl IkSettings {
    pub fn validate(&self) -> Result<()> {
        let w_sym = (self.w - self.w.transpose()).amax() <= 1e-12;
        if !w_sym || self.w.cholesky().is_none() {
            return Err(Error::InvalidParameter("IK weight matrix must be SPD".into()));
        }
        let k_diag = (0..3).all(|i| self.k[(i, i)] > 0.0)
            && (0..3).all(|i| (0..3).all(|j| i == j || self.k[(i, j)] == 0.0));
        if !k_diag {
            return Err(Error::InvalidParameter("IK task gain must be positive diagonal".into()));
        }
        if !(self.damping >= 0.0) || !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("IK damping must be ≥ 0 and dt > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Proposed,
    Baseline,
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControllerKind::Proposed => "proposed",
            ControllerKind::Baseline => "baseline",
        })
    }
}

/// Operator references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct References {
    pub p_z_d: f64,
    pub phi_d: Vec3,
    pub yaw_rate_d: f64,
    /// Body-frame hand targets, m.
    pub x_d_left: Vec3,
    pub x_d_right: Vec3,
    /// Desired head orientation relative to its home pose, body frame.
    pub head_r_d: Rotation3<f64>,
    pub hand_closure_d: [f64; 2],
}

impl References {
    /// Hold the given altitude, level attitude, and the supplied hand targets.
    pub fn hold(p_z_d: f64, x_d_left: Vec3, x_d_right: Vec3) -> Self {
        References {
            p_z_d,
            phi_d: Vec3::zeros(),
            yaw_rate_d: 0.0,
            x_d_left,
            x_d_right,
            head_r_d: Rotation3::identity(),
            hand_closure_d: [0.0; 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.p_z_d.is_finite()
            && self.yaw_rate_d.is_finite()
            && self.phi_d.iter().chain(&self.x_d_left).chain(&self.x_d_right).all(|x| x.is_finite())
            && self.head_r_d.matrix().iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("references must be finite".into()));
        }
        if !self.hand_closure_d.iter().all(|h| (0.0..=1.0).contains(h)) {
            return Err(Error::InvalidParameter("hand closure must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Autopilot-interface commands produced by the outer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInputs {
    pub thrust: f64,
    pub phi_dot_d: Vec3,
    /// Roll or pitch exceeded the linearization guard this update.
    pub guard_active: bool,
}

/// Equilibrium thrust and moment for a vertical tether.
pub fn equilibrium_feedforward(summary: &MassSummary, f_t: &Vec3, g: f64) -> (f64, Vec3) {
    let weight = summary.mass * g;
    (weight - f_t.z, summary.com.cross(&(Vec3::z() * weight)))
}

/// Gravity-torque compensation in the configured form.
pub fn compensation_torque(mode: CompensationMode, summary: &MassSummary, rotation: &Rotation3<f64>, g: f64) -> Vec3 {
    let weight = Vec3::z() * (summary.mass * g);
    match mode {
        CompensationMode::Printed => summary.com.cross(&weight),
        CompensationMode::RotationExact => summary.com.cross(&(rotation.inverse() * weight)),
    }
}

/// Outer loop with or without the CoM compensation term.
#[derive(Debug, Clone, PartialEq)]
pub struct AttitudeController {
    pub gains: ControlGains,
    pub config: ControlConfig,
    pub g: f64,
}

impl AttitudeController {
    pub fn from_params(params: &RobotParams) -> Self {
        AttitudeController {
            gains: params.gains.clone(),
            config: params.control.clone(),
            g: params.g,
        }
    }

    /// Euler-angle rates of the measured body rates.
    pub fn euler_rates(&self, state: &BodyState) -> Vec3 {
        math::euler_rates_from_body_rates(&state.phi, &state.omega, self.config.euler_rate_guard)
    }

    pub fn altitude_thrust(&self, state: &BodyState, refs: &References, summary: &MassSummary, f_t: &Vec3) -> f64 {
        let m = summary.mass;
        let dz = state.p.z - refs.p_z_d;
        m * self.g - f_t.z + m * (-self.gains.b1 * state.v.z - self.gains.k1 * dz)
    }

    /// Desired attitude moment `[c × m g e3] + I_O (−B2 Φ̇ − K2 (Φ − Φ_d))`.
    pub fn desired_moment(&self, state: &BodyState, refs: &References, summary: &MassSummary, compensate: bool) -> (Vec3, bool) {
        let phi_dot = self.euler_rates(state);
        let mut err = state.phi - refs.phi_d;
        err.z = math::wrap_angle(err.z);
        let guard = self.config.linearization_guard;
        let guard_active = state.phi.x.abs() > guard || state.phi.y.abs() > guard;
        err = err.map(|e| e.clamp(-guard, guard));
        let shaped = -self.gains.b2.component_mul(&phi_dot) - self.gains.k2.component_mul(&err);
        let mut m_d = summary.inertia * shaped;
        if compensate {
            m_d += compensation_torque(self.config.compensation, summary, &state.rotation, self.g);
        }
        (m_d, guard_active)
    }

    pub fn command(
        &self,
        kind: ControllerKind,
        state: &BodyState,
        refs: &References,
        summary: &MassSummary,
        f_t: &Vec3,
    ) -> ControlInputs {
        let compensate = kind == ControllerKind::Proposed;
        let thrust = self.altitude_thrust(state, refs, summary, f_t);
        let (m_d, guard_active) = self.desired_moment(state, refs, summary, compensate);
        let phi_dot_d = m_d.component_div(&self.gains.b_phi) + self.euler_rates(state);
        ControlInputs {
            thrust,
            phi_dot_d,
            guard_active,
        }
    }
}

/// Proposed whole-body law (CoM-compensating).
pub fn outer_loop(state: &BodyState, refs: &References, params: &RobotParams, summary: &MassSummary, f_t: &Vec3) -> ControlInputs {
    AttitudeController::from_params(params).command(ControllerKind::Proposed, state, refs, summary, f_t)
}

/// Autopilot-only baseline: the same law without the CoM term.
pub fn baseline_attitude(
    state: &BodyState,
    refs: &References,
    params: &RobotParams,
    summary: &MassSummary,
    f_t: &Vec3,
) -> ControlInputs {
    AttitudeController::from_params(params).command(ControllerKind::Baseline, state, refs, summary, f_t)
}

/// Modeled autopilot rate loop `M = b_Φ (Φ̇_d − Φ̇)`.
pub fn inner_loop_torque(phi_dot_d: &Vec3, phi_dot: &Vec3, b_phi: &Vec3) -> Vec3 {
    b_phi.component_mul(&(phi_dot_d - phi_dot))
}

/// Weighted, damped right pseudo-inverse `W⁻¹Jᵀ(J W⁻¹ Jᵀ + λ² I)⁻¹`.
pub fn weighted_pseudo_inverse(
    j: &SMatrix<f64, 3, ARM_DOF>,
    w: &SMatrix<f64, ARM_DOF, ARM_DOF>,
    damping: f64,
) -> Result<SMatrix<f64, ARM_DOF, 3>> {
    let w_inv = w
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("IK weight matrix must be SPD".into()))?
        .inverse();
    let wj = w_inv * j.transpose();
    let gram = j * wj + Mat3::identity() * (damping * damping);
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("task Jacobian is singular; use damping > 0".into()))?;
    Ok(wj * gram_inv)
}

/// Joint velocity of one CLIK update.
pub fn arm_ik_velocity(chain: &Chain, q_a: &ArmJoints, x_d: &Vec3, settings: &IkSettings) -> Result<JointVector> {
    let j = chain.position_jacobian(q_a)?;
    let j = SMatrix::<f64, 3, ARM_DOF>::from_column_slice(j.as_slice());
    let x_e = chain.fk(q_a)?.end_position();
    let pinv = weighted_pseudo_inverse(&j, &settings.w, settings.damping)?;
    Ok(pinv * (settings.k * (x_d - x_e)))
}

/// One discrete CLIK step: `q_{k+1} = q_k + q̇ Δt`.
pub fn arm_ik_step(chain: &Chain, q_a: &ArmJoints, x_d: &Vec3, settings: &IkSettings) -> Result<ArmJoints> {
    let qd = arm_ik_velocity(chain, q_a, x_d, settings)?;
    Ok(std::array::from_fn(|i| q_a[i] + qd[i] * settings.dt))
}

pub fn motor_targets(f: &TendonConfigMatrix, q_a_d: &ArmJoints) -> MotorVector {
    f.motors_from_joints(&JointVector::from(*q_a_d))
}

/// Head orientation relative to its home pose, expressed in the body frame.
pub fn head_orientation(chain: &Chain, q_h: &HeadJoints) -> Result<Rotation3<f64>> {
    let home = chain.fk(&[0.0; HEAD_DOF])?.end().rotation;
    let now = chain.fk(q_h)?.end().rotation;
    Ok((now * home.inverse()).to_rotation_matrix())
}

/// Proportional yaw/pitch step toward `head_r_d`. Roll is discarded.
pub fn head_ik_step(chain: &Chain, q_h: &HeadJoints, head_r_d: &Rotation3<f64>, gain: f64, dt: f64) -> Result<HeadJoints> {
    let (_, pitch_d, yaw_d) = head_r_d.euler_angles();
    let (_, pitch, yaw) = head_orientation(chain, q_h)?.euler_angles();
    let err = Vector2::new(math::wrap_angle(yaw_d - yaw), pitch_d - pitch);

    // yaw and pitch rates produced by each joint: project its axis on the
    // vertical and on the yawed pitch axis
    let jw = chain.jacobian(q_h)?;
    let pitch_axis = Rotation3::from_axis_angle(&Vec3::z_axis(), yaw) * Vec3::y();
    let a = Matrix2::from_fn(|r, c| {
        let axis: Vec3 = jw.fixed_view::<3, 1>(3, c).into_owned();
        if r == 0 {
            axis.z
        } else {
            axis.dot(&pitch_axis)
        }
    });
    let a_inv = a
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("head joints cannot span yaw and pitch".into()))?;
    let qd = a_inv * err * gain;
    Ok([q_h[0] + qd[0] * dt, q_h[1] + qd[1] * dt])
}
