//! JSON wire format: one object per WebSocket text frame.

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use samadyn_core::control::{ControllerKind, References};
use samadyn_core::math::{self, Vec3};
use samadyn_core::sim::{ClampFlags, Snapshot};

pub const MAX_ALTITUDE_DELTA: f64 = 0.05;
pub const MAX_YAW_RATE: f64 = 0.5;
/// Hand targets farther than this from the body origin are rejected, m.
pub const MAX_TARGET_DISTANCE: f64 = 1.0;
/// Per-client ceiling on `head_orientation` messages, Hz.
pub const HEAD_ORIENTATION_RATE_HZ: f64 = 60.0;

/// Server → client telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateMessage {
    pub t: f64,
    pub p: [f64; 3],
    #[serde(rename = "Phi")]
    pub phi: [f64; 3],
    pub omega: [f64; 3],
    pub q_lb: [f64; 12],
    pub com: [f64; 3],
    pub thrust: f64,
    pub tether: [f64; 3],
    pub ee_left: [f64; 3],
    pub ee_right: [f64; 3],
    pub hand_closure: [f64; 2],
    pub clamp_flags: ClampFlags,
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

impl StateMessage {
    pub fn from_snapshot(snap: &Snapshot, clamp_flags: ClampFlags) -> Self {
        let s = &snap.state;
        let q = s.torso.to_vec();
        StateMessage {
            t: snap.t,
            p: arr(&s.p),
            phi: arr(&s.phi),
            omega: arr(&s.omega),
            q_lb: std::array::from_fn(|i| q[i]),
            com: arr(&snap.summary.com),
            thrust: snap.inputs.thrust,
            tether: arr(&snap.tether),
            ee_left: arr(&snap.ee_left),
            ee_right: arr(&snap.ee_right),
            hand_closure: s.hand_closure,
            clamp_flags,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state message serializes")
    }
}

/// Client → server commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case", deny_unknown_fields)]
pub enum CommandMessage {
    /// Altitude setpoint increment, m.
    AltitudeDelta(f64),
    /// Persistent yaw-rate reference, rad/s.
    YawRate(f64),
    /// Body-frame hand target, m.
    EeTargetLeft([f64; 3]),
    EeTargetRight([f64; 3]),
    /// Head orientation as (roll, pitch, yaw), rad.
    HeadOrientation([f64; 3]),
    HandClosureLeft(f64),
    HandClosureRight(f64),
    ControllerSelect(ControllerKind),
}

/// Server → client rejection of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename = "error")]
pub struct ErrorMessage {
    pub message: String,
}

impl ErrorMessage {
    pub fn new(message: impl Into<String>) -> Self {
        ErrorMessage {
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error message serializes")
    }
}

impl CommandMessage {
    pub fn parse(text: &str) -> Result<Self, String> {
        let msg: CommandMessage = serde_json::from_str(text).map_err(|e| format!("malformed command: {e}"))?;
        msg.validate()?;
        Ok(msg)
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            CommandMessage::AltitudeDelta(v) => {
                if !(v.abs() <= MAX_ALTITUDE_DELTA) {
                    return Err(format!("altitude_delta must satisfy |v| <= {MAX_ALTITUDE_DELTA} m"));
                }
            }
            CommandMessage::YawRate(v) => {
                if !(v.abs() <= MAX_YAW_RATE) {
                    return Err(format!("yaw_rate must satisfy |v| <= {MAX_YAW_RATE} rad/s"));
                }
            }
            CommandMessage::EeTargetLeft(x) | CommandMessage::EeTargetRight(x) => {
                if !finite(x) || Vec3::from(*x).norm() > MAX_TARGET_DISTANCE {
                    return Err(format!("end-effector target must be finite and within {MAX_TARGET_DISTANCE} m"));
                }
            }
            CommandMessage::HeadOrientation(x) => {
                if !finite(x) {
                    return Err("head_orientation must be finite".into());
                }
            }
            CommandMessage::HandClosureLeft(v) | CommandMessage::HandClosureRight(v) => {
                if !(0.0..=1.0).contains(v) {
                    return Err("hand closure must lie in [0, 1]".into());
                }
            }
            CommandMessage::ControllerSelect(_) => {}
        }
        Ok(())
    }
}

/// References plus the live controller choice.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleopTarget {
    pub refs: References,
    pub controller: ControllerKind,
}

/// Applies one validated command.
pub fn apply_command(msg: &CommandMessage, mut target: TeleopTarget) -> TeleopTarget {
    let refs = &mut target.refs;
    match msg {
        CommandMessage::AltitudeDelta(v) => refs.p_z_d += v,
        CommandMessage::YawRate(v) => refs.yaw_rate_d = *v,
        CommandMessage::EeTargetLeft(x) => refs.x_d_left = Vec3::from(*x),
        CommandMessage::EeTargetRight(x) => refs.x_d_right = Vec3::from(*x),
        CommandMessage::HeadOrientation([roll, pitch, yaw]) => {
            refs.head_r_d = Rotation3::from_euler_angles(*roll, *pitch, *yaw)
        }
        CommandMessage::HandClosureLeft(v) => refs.hand_closure_d[0] = *v,
        CommandMessage::HandClosureRight(v) => refs.hand_closure_d[1] = *v,
        CommandMessage::ControllerSelect(kind) => target.controller = *kind,
    }
    target
}

/// Integrates the yaw-rate reference into the yaw setpoint over `dt`.
pub fn advance_yaw(refs: &mut References, dt: f64) {
    refs.phi_d.z = math::wrap_angle(refs.phi_d.z + refs.yaw_rate_d * dt);
}
