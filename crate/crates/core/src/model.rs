//! Shared domain types and the mass / CoM / inertia aggregation of the
//! composite body (drone + suspension rod + torso links).

use std::path::Path;

use nalgebra::{Isometry3, Rotation3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::control::{ControlConfig, ControlGains, IkParams};
use crate::kinematics::{DhRow, TorsoKinematics};
use crate::math::{self, mat3_rows, Mat3, Vec3};
use crate::sim::RigLimits;
use crate::{Error, Result};

pub const ARM_DOF: usize = 5;
pub const HEAD_DOF: usize = 2;
pub const TORSO_DOF: usize = 2 * ARM_DOF + HEAD_DOF;

const DEFAULT_PARAMS: &str = include_str!("../../../params/default.json");

/// Mass properties of one torso link, expressed in the link's DH frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkInertial {
    pub mass: f64,
    pub com: Vec3,
    /// Inertia about the link CoM.
    #[serde(with = "mat3_rows")]
    pub inertia: Mat3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsoLinks {
    pub left_arm: Vec<LinkInertial>,
    pub right_arm: Vec<LinkInertial>,
    pub head: Vec<LinkInertial>,
}

/// Fixed pose of a chain base in the body frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mount {
    pub translation: Vec3,
    #[serde(with = "mat3_rows")]
    pub rotation: Mat3,
}

impl Mount {
    pub fn identity() -> Self {
        Mount {
            translation: Vec3::zeros(),
            rotation: Mat3::identity(),
        }
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        let rot = Rotation3::from_matrix_unchecked(self.rotation);
        Isometry3::from_parts(
            Translation3::from(self.translation),
            UnitQuaternion::from_rotation_matrix(&rot),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mounts {
    pub left_arm: Mount,
    pub right_arm: Mount,
    pub head: Mount,
}

/// Counterweight-over-pulley suspension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetherConfig {
    /// Cable exit point, fixed in the inertial frame.
    pub anchor: Vec3,
    pub counterweight_mass: f64,
}

/// Every physical constant, gain and limit the simulator uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    pub g: f64,
    pub m_fb: f64,
    pub p_fb: Vec3,
    /// Drone inertia about the body origin.
    #[serde(with = "mat3_rows")]
    pub i_fb: Mat3,
    pub m_rod: f64,
    pub p_rod: Vec3,
    /// Rod inertia about the body origin.
    #[serde(with = "mat3_rows")]
    pub i_rod: Mat3,
    pub links: TorsoLinks,
    pub dh_arm: Vec<DhRow>,
    pub dh_head: Vec<DhRow>,
    pub mounts: Mounts,
    pub r_m: f64,
    pub r_j: f64,
    /// Height of the cable attachment above the body origin, along body z.
    pub l: f64,
    pub thrust_max: f64,
    pub moment_max: f64,
    /// First-order lag of joint tracking (tendon elasticity surrogate).
    pub joint_time_constant: f64,
    pub tether: TetherConfig,
    pub gains: ControlGains,
    pub control: ControlConfig,
    pub ik: IkParams,
    pub rig: RigLimits,
}

impl RobotParams {
    /// The shipped `params/default.json`.
    pub fn default_params() -> Self {
        Self::from_json_str(DEFAULT_PARAMS).expect("shipped parameter file is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let params: RobotParams = serde_json::from_str(s)?;
        let findings = params.validate();
        if findings.is_empty() {
            Ok(params)
        } else {
            Err(Error::InvalidParameter(findings.join("; ")))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("params serialize");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Links in `q_lb` order: left arm, right arm, head.
    pub fn torso_links(&self) -> impl Iterator<Item = &LinkInertial> {
        self.links
            .left_arm
            .iter()
            .chain(&self.links.right_arm)
            .chain(&self.links.head)
    }

    /// Moves the drone CoM so that the composite CoM shifts by `shift` (body
    /// frame) without changing total mass. The drone inertia about the origin
    /// is updated with the parallel-axis terms.
    pub fn with_com_shift(&self, shift: &Vec3) -> Self {
        let mut out = self.clone();
        let m = aggregate_mass(self);
        let new_p = self.p_fb + shift * (m / self.m_fb);
        out.i_fb = self.i_fb - math::point_mass_inertia(self.m_fb, &self.p_fb)
            + math::point_mass_inertia(self.m_fb, &new_p);
        out.p_fb = new_p;
        out
    }

    /// Checks every documented invariant and returns one message per violation.
    pub fn validate(&self) -> Vec<String> {
        let mut findings = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                findings.push(msg);
            }
        };
        let spd = |m: &Mat3| math::is_symmetric_positive_definite(m, 1e-12);

        check(self.g > 0.0, format!("g must be positive (got {})", self.g));
        check(self.m_fb > 0.0, "m_fb must be positive".into());
        check(self.m_rod > 0.0, "m_rod must be positive".into());
        check(spd(&self.i_fb), "i_fb must be symmetric positive-definite".into());
        check(spd(&self.i_rod), "i_rod must be symmetric positive-definite".into());
        for (name, links, n) in [
            ("left_arm", &self.links.left_arm, ARM_DOF),
            ("right_arm", &self.links.right_arm, ARM_DOF),
            ("head", &self.links.head, HEAD_DOF),
        ] {
            check(
                links.len() == n,
                format!("links.{name} must have {n} entries (got {})", links.len()),
            );
            for (i, link) in links.iter().enumerate() {
                check(link.mass > 0.0, format!("links.{name}[{i}].mass must be positive"));
                check(
                    spd(&link.inertia),
                    format!("links.{name}[{i}].inertia must be symmetric positive-definite"),
                );
                check(
                    link.com.iter().all(|x| x.is_finite()),
                    format!("links.{name}[{i}].com must be finite"),
                );
            }
        }
        check(
            self.dh_arm.len() == ARM_DOF,
            format!("dh_arm must have {ARM_DOF} rows (got {})", self.dh_arm.len()),
        );
        check(
            self.dh_head.len() == HEAD_DOF,
            format!("dh_head must have {HEAD_DOF} rows (got {})", self.dh_head.len()),
        );
        for row in self.dh_arm.iter().chain(&self.dh_head) {
            check(row.is_finite(), "DH entries must be finite".into());
        }
        for (name, mount) in [
            ("left_arm", &self.mounts.left_arm),
            ("right_arm", &self.mounts.right_arm),
            ("head", &self.mounts.head),
        ] {
            check(
                math::orthonormality_error(&mount.rotation) < 1e-9
                    && mount.rotation.determinant() > 0.0,
                format!("mounts.{name}.rotation must be a proper rotation"),
            );
        }
        check(self.r_m > 0.0, "r_m must be positive".into());
        check(self.r_j > 0.0, "r_j must be positive".into());
        check(self.l.is_finite(), "l must be finite".into());
        check(self.thrust_max > 0.0, "thrust_max must be positive".into());
        check(self.moment_max > 0.0, "moment_max must be positive".into());
        check(
            self.joint_time_constant > 0.0,
            "joint_time_constant must be positive".into(),
        );
        check(
            self.tether.counterweight_mass >= 0.0,
            "tether.counterweight_mass must be non-negative".into(),
        );
        for msg in self.gains.validate() {
            check(false, msg);
        }
        for msg in self.control.validate() {
            check(false, msg);
        }
        for msg in self.ik.validate() {
            check(false, msg);
        }
        for msg in self.rig.validate() {
            check(false, msg);
        }
        findings
    }
}

/// Joint angles of the humanoid torso, `q_lb = (q_la, q_ra, q_h)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TorsoConfig {
    pub q_la: [f64; ARM_DOF],
    pub q_ra: [f64; ARM_DOF],
    pub q_h: [f64; HEAD_DOF],
}

impl TorsoConfig {
    pub fn to_vec(&self) -> Vec<f64> {
        self.q_la
            .iter()
            .chain(&self.q_ra)
            .chain(&self.q_h)
            .copied()
            .collect()
    }

    pub fn from_slice(q: &[f64]) -> Result<Self> {
        if q.len() != TORSO_DOF {
            return Err(Error::DimensionMismatch {
                expected: TORSO_DOF,
                got: q.len(),
            });
        }
        let mut out = TorsoConfig::default();
        out.q_la.copy_from_slice(&q[..ARM_DOF]);
        out.q_ra.copy_from_slice(&q[ARM_DOF..2 * ARM_DOF]);
        out.q_h.copy_from_slice(&q[2 * ARM_DOF..]);
        Ok(out)
    }

    /// Elementwise `f(self_i, other_i)`.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let a = self.to_vec();
        let b = other.to_vec();
        let v: Vec<f64> = a.iter().zip(&b).map(|(x, y)| f(*x, *y)).collect();
        Self::from_slice(&v).expect("same dimension")
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|x| x.is_finite())
    }
}

/// Floating-base state plus torso joints.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyState {
    pub p: Vec3,
    /// Body to inertial.
    pub rotation: Rotation3<f64>,
    /// Euler angles (roll, pitch, yaw), always re-derived from `rotation`.
    pub phi: Vec3,
    pub v: Vec3,
    /// Body-frame angular velocity.
    pub omega: Vec3,
    pub torso: TorsoConfig,
    pub torso_rate: TorsoConfig,
    pub hand_closure: [f64; 2],
}

impl BodyState {
    pub fn at_rest(p: Vec3) -> Self {
        BodyState {
            p,
            rotation: Rotation3::identity(),
            phi: Vec3::zeros(),
            v: Vec3::zeros(),
            omega: Vec3::zeros(),
            torso: TorsoConfig::default(),
            torso_rate: TorsoConfig::default(),
            hand_closure: [0.0; 2],
        }
    }

    pub fn with_attitude(mut self, phi: Vec3) -> Self {
        self.set_rotation(math::rotation_from_euler(&phi));
        self
    }

    pub fn set_rotation(&mut self, r: Rotation3<f64>) {
        self.rotation = r;
        self.phi = math::euler_from_rotation(&r);
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
            && self.rotation.matrix().iter().all(|x| x.is_finite())
            && self.torso.is_finite()
    }
}

/// Composite mass properties in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSummary {
    pub mass: f64,
    pub com: Vec3,
    /// Inertia about the body origin.
    pub inertia: Mat3,
}

/// Body-frame placement of one torso link: orientation of its frame and CoM position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPlacement {
    pub rotation: Mat3,
    pub com: Vec3,
}

pub fn aggregate_mass(params: &RobotParams) -> f64 {
    params.m_fb + params.m_rod + params.torso_links().map(|l| l.mass).sum::<f64>()
}

/// Mass-weighted mean of the drone, rod and link CoMs (`link_coms` in `q_lb` order).
pub fn aggregate_com(params: &RobotParams, link_coms: &[Vec3]) -> Result<Vec3> {
    let n = params.torso_links().count();
    if link_coms.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: link_coms.len(),
        });
    }
    let moment = params
        .torso_links()
        .zip(link_coms)
        .fold(params.p_fb * params.m_fb + params.p_rod * params.m_rod, |acc, (l, p)| {
            acc + p * l.mass
        });
    Ok(moment / aggregate_mass(params))
}

/// Inertia about the body origin: drone + rod + each link rotated into the
/// body frame and shifted by the parallel-axis term.
pub fn aggregate_inertia(params: &RobotParams, placements: &[LinkPlacement]) -> Result<Mat3> {
    let n = params.torso_links().count();
    if placements.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: placements.len(),
        });
    }
    let total = params
        .torso_links()
        .zip(placements)
        .fold(params.i_fb + params.i_rod, |acc, (link, place)| {
            let r = &place.rotation;
            acc + r * link.inertia * r.transpose()
                + math::point_mass_inertia(link.mass, &place.com)
        });
    // symmetrize away rounding from the rotations
    Ok((total + total.transpose()) * 0.5)
}

/// Full composite mass properties for a torso configuration.
pub fn mass_summary(params: &RobotParams, torso: &TorsoConfig) -> MassSummary {
    let kin = TorsoKinematics::from_params(params);
    mass_summary_with(&kin, params, torso)
}

/// As [`mass_summary`], reusing prebuilt chains.
pub fn mass_summary_with(
    kin: &TorsoKinematics,
    params: &RobotParams,
    torso: &TorsoConfig,
) -> MassSummary {
    let placements = kin.link_placements(params, torso);
    let coms: Vec<Vec3> = placements.iter().map(|p| p.com).collect();
    MassSummary {
        mass: aggregate_mass(params),
        com: aggregate_com(params, &coms).expect("placements cover every link"),
        inertia: aggregate_inertia(params, &placements).expect("placements cover every link"),
    }
}
