//! Tendon differential drive: six motors to five arm joints.

use nalgebra::{SMatrix, SVector};

use crate::{Error, Result};

pub type MotorVector = SVector<f64, 6>;
pub type JointVector = SVector<f64, 5>;

pub fn transmission_ratio(r_m: f64, r_j: f64) -> Result<f64> {
    if !(r_j > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "joint pulley radius must be positive (got {r_j})"
        )));
    }
    if !(r_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "motor pulley radius must be positive (got {r_m})"
        )));
    }
    Ok(r_m / r_j)
}

/// The 5×6 configuration matrix `q_a = F q_m`.
///
/// Row 1 is the shoulder motor, rows 2–3 the differential elbow pair, row 4
/// the third elbow (scaled by `r` like the differential rows) and row 5 the
/// directly driven wrist.
#[derive(Debug, Clone, PartialEq)]
pub struct TendonConfigMatrix {
    f: SMatrix<f64, 5, 6>,
    pinv: SMatrix<f64, 6, 5>,
    ratio: f64,
}

impl TendonConfigMatrix {
    pub fn new(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "transmission ratio must be positive (got {ratio})"
            )));
        }
        let r = ratio;
        #[rustfmt::skip]
        let f = SMatrix::<f64, 5, 6>::from_row_slice(&[
            1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, r,   -r,  0.0, 0.0, 0.0,
            0.0, 0.0, r,   -r,  0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, r,   0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        ]);
        // full row rank: F† = Fᵀ (F Fᵀ)⁻¹
        let gram = (f * f.transpose())
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("configuration matrix is rank deficient".into()))?;
        let pinv = f.transpose() * gram.inverse();
        Ok(TendonConfigMatrix { f, pinv, ratio })
    }

    pub fn from_radii(r_m: f64, r_j: f64) -> Result<Self> {
        Self::new(transmission_ratio(r_m, r_j)?)
    }

    pub fn matrix(&self) -> &SMatrix<f64, 5, 6> {
        &self.f
    }

    pub fn pseudo_inverse(&self) -> &SMatrix<f64, 6, 5> {
        &self.pinv
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn joints_from_motors(&self, q_m: &MotorVector) -> JointVector {
        self.f * q_m
    }

    /// Minimum-norm motor angles producing `q_a`.
    pub fn motors_from_joints(&self, q_a: &JointVector) -> MotorVector {
        self.pinv * q_a
    }
}

pub fn joints_from_motors(f: &TendonConfigMatrix, q_m: &[f64]) -> Result<JointVector> {
    if q_m.len() != 6 {
        return Err(Error::DimensionMismatch { expected: 6, got: q_m.len() });
    }
    Ok(f.joints_from_motors(&MotorVector::from_column_slice(q_m)))
}

pub fn motors_from_joints(f: &TendonConfigMatrix, q_a: &[f64]) -> Result<MotorVector> {
    if q_a.len() != 5 {
        return Err(Error::DimensionMismatch { expected: 5, got: q_a.len() });
    }
    Ok(f.motors_from_joints(&JointVector::from_column_slice(q_a)))
}
