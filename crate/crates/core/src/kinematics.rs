//! Denavit-Hartenberg forward kinematics, geometric Jacobians and link CoM
//! placement for the two arms and the head.
//!
//! Standard (distal) convention: `A_i = Rz(theta_offset + q) Tz(d) Tx(a) Rx(alpha)`.
//! Every pose returned here is expressed in the chain's parent frame, i.e. the
//! body frame once the mount is applied.

use nalgebra::{Isometry3, Matrix3xX, Matrix6xX, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::model::{LinkInertial, LinkPlacement, RobotParams, TorsoConfig};
use crate::math::Vec3;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    /// Constant part of the joint angle.
    pub theta_offset: f64,
}

impl DhRow {
    pub const ZERO: DhRow = DhRow {
        a: 0.0,
        alpha: 0.0,
        d: 0.0,
        theta_offset: 0.0,
    };

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.alpha.is_finite() && self.d.is_finite() && self.theta_offset.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub rows: Vec<DhRow>,
    pub mount: Isometry3<f64>,
}

/// All frames of a chain: `frames[0]` is the mount, `frames[i]` the frame
/// after joint `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPose {
    pub frames: Vec<Isometry3<f64>>,
}

impl ChainPose {
    pub fn end(&self) -> &Isometry3<f64> {
        self.frames.last().expect("chain pose has a mount frame")
    }

    pub fn end_position(&self) -> Vec3 {
        self.end().translation.vector
    }
}

pub fn dh_transform(row: &DhRow, q: f64) -> Isometry3<f64> {
    let theta = row.theta_offset + q;
    let (s, c) = theta.sin_cos();
    let rot = UnitQuaternion::from_axis_angle(&Vec3::z_axis(), theta)
        * UnitQuaternion::from_axis_angle(&Vec3::x_axis(), row.alpha);
    Isometry3::from_parts(Translation3::new(row.a * c, row.a * s, row.d), rot)
}

impl Chain {
    pub fn new(rows: Vec<DhRow>, mount: Isometry3<f64>) -> Self {
        Chain { rows, mount }
    }

    pub fn dof(&self) -> usize {
        self.rows.len()
    }

    fn check_dim(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                got: q.len(),
            });
        }
        Ok(())
    }

    pub fn fk(&self, q: &[f64]) -> Result<ChainPose> {
        self.check_dim(q)?;
        let mut frames = Vec::with_capacity(self.dof() + 1);
        let mut t = self.mount;
        frames.push(t);
        for (row, &qi) in self.rows.iter().zip(q) {
            t *= dh_transform(row, qi);
            frames.push(t);
        }
        Ok(ChainPose { frames })
    }

    /// 6×N geometric Jacobian, linear rows first. Columns are
    /// `(z_{i-1} × (p_e − p_{i-1}), z_{i-1})` for revolute joints.
    pub fn jacobian(&self, q: &[f64]) -> Result<Matrix6xX<f64>> {
        let pose = self.fk(q)?;
        Ok(jacobian_from_pose(&pose))
    }

    /// Linear (position) block of the Jacobian.
    pub fn position_jacobian(&self, q: &[f64]) -> Result<Matrix3xX<f64>> {
        Ok(self.jacobian(q)?.fixed_rows::<3>(0).into_owned())
    }

    /// Each link's CoM mapped through its frame into the parent frame.
    pub fn link_coms(&self, q: &[f64], com_local: &[Vec3]) -> Result<Vec<Vec3>> {
        if com_local.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                got: com_local.len(),
            });
        }
        let pose = self.fk(q)?;
        Ok(pose.frames[1..]
            .iter()
            .zip(com_local)
            .map(|(f, c)| f.transform_point(&(*c).into()).coords)
            .collect())
    }
}

fn jacobian_from_pose(pose: &ChainPose) -> Matrix6xX<f64> {
    let n = pose.frames.len() - 1;
    let p_e = pose.end_position();
    let mut j = Matrix6xX::zeros(n);
    for (i, frame) in pose.frames[..n].iter().enumerate() {
        let z = frame.rotation * Vec3::z();
        let p = frame.translation.vector;
        let lin = z.cross(&(p_e - p));
        j.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, i).copy_from(&z);
    }
    j
}

pub fn chain_fk(chain: &Chain, q: &[f64]) -> Result<ChainPose> {
    chain.fk(q)
}

pub fn geometric_jacobian(chain: &Chain, q: &[f64]) -> Result<Matrix6xX<f64>> {
    chain.jacobian(q)
}

pub fn link_com_world(chain: &Chain, q: &[f64], com_local: &[Vec3]) -> Result<Vec<Vec3>> {
    chain.link_coms(q, com_local)
}

/// The three torso chains built from a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsoKinematics {
    pub left_arm: Chain,
    pub right_arm: Chain,
    pub head: Chain,
}

impl TorsoKinematics {
    pub fn from_params(params: &RobotParams) -> Self {
        TorsoKinematics {
            left_arm: Chain::new(params.dh_arm.clone(), params.mounts.left_arm.isometry()),
            right_arm: Chain::new(params.dh_arm.clone(), params.mounts.right_arm.isometry()),
            head: Chain::new(params.dh_head.clone(), params.mounts.head.isometry()),
        }
    }

    /// Body-frame link placements in `q_lb` order.
    pub fn link_placements(&self, params: &RobotParams, torso: &TorsoConfig) -> Vec<LinkPlacement> {
        let mut out = Vec::with_capacity(crate::model::TORSO_DOF);
        for (chain, q, links) in [
            (&self.left_arm, &torso.q_la[..], &params.links.left_arm),
            (&self.right_arm, &torso.q_ra[..], &params.links.right_arm),
            (&self.head, &torso.q_h[..], &params.links.head),
        ] {
            let pose = chain.fk(q).expect("torso dimensions are fixed");
            out.extend(pose.frames[1..].iter().zip(links).map(|(f, l): (_, &LinkInertial)| {
                LinkPlacement {
                    rotation: *f.rotation.to_rotation_matrix().matrix(),
                    com: f.transform_point(&l.com.into()).coords,
                }
            }));
        }
        out
    }

    /// Body-frame end-effector positions `(left, right)`.
    pub fn hand_positions(&self, torso: &TorsoConfig) -> (Vec3, Vec3) {
        let l = self.left_arm.fk(&torso.q_la).expect("arm dof").end_position();
        let r = self.right_arm.fk(&torso.q_ra).expect("arm dof").end_position();
        (l, r)
    }
}
