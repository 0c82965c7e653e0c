//! Small linear-algebra helpers shared by the model, plant and controllers.
//!
//! Attitude uses Z-Y-X intrinsic Euler angles, `R = Rz(psi) * Ry(theta) * Rx(phi)`,
//! stored as `(phi, theta, psi)` = (roll, pitch, yaw).

use nalgebra::{Matrix3, Rotation3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Skew-symmetric cross-product matrix: `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn rotation_from_euler(phi: &Vec3) -> Rotation3<f64> {
    Rotation3::from_euler_angles(phi.x, phi.y, phi.z)
}

pub fn euler_from_rotation(r: &Rotation3<f64>) -> Vec3 {
    let (roll, pitch, yaw) = r.euler_angles();
    Vec3::new(roll, pitch, yaw)
}

/// Maps Euler-angle rates to body angular velocity: `omega = E(phi) * phi_dot`.
pub fn euler_rate_matrix(phi: &Vec3) -> Mat3 {
    let (sr, cr) = phi.x.sin_cos();
    let (sp, cp) = phi.y.sin_cos();
    Mat3::new(
        1.0,
        0.0,
        -sp,
        0.0,
        cr,
        sr * cp,
        0.0,
        -sr,
        cr * cp,
    )
}

/// Inverse of [`euler_rate_matrix`]: `phi_dot = E(phi)^-1 * omega`.
///
/// Pitch is clamped to `±pitch_guard` before evaluating so the map stays
/// finite near gimbal lock.
pub fn euler_rates_from_body_rates(phi: &Vec3, omega: &Vec3, pitch_guard: f64) -> Vec3 {
    let (sr, cr) = phi.x.sin_cos();
    let pitch = phi.y.clamp(-pitch_guard, pitch_guard);
    let (sp, cp) = pitch.sin_cos();
    let tp = sp / cp;
    let e_inv = Mat3::new(
        1.0,
        sr * tp,
        cr * tp,
        0.0,
        cr,
        -sr,
        0.0,
        sr / cp,
        cr / cp,
    );
    e_inv * omega
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Projects a nearly-orthonormal matrix back onto SO(3) (polar decomposition).
pub fn orthonormalize(r: &Rotation3<f64>) -> Rotation3<f64> {
    let svd = r.matrix().svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut m = u * v_t;
    if m.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        m = u * v_t;
    }
    Rotation3::from_matrix_unchecked(m)
}

/// `‖RᵀR − I‖_F`.
pub fn orthonormality_error(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

/// Second-moment contribution of a point mass at `p`: `m (|p|² I − p pᵀ)`.
pub fn point_mass_inertia(mass: f64, p: &Vec3) -> Mat3 {
    mass * (Mat3::identity() * p.norm_squared() - p * p.transpose())
}

pub fn is_symmetric_positive_definite(m: &Mat3, tol: f64) -> bool {
    if (m - m.transpose()).abs().max() > tol {
        return false;
    }
    m.symmetric_eigenvalues().iter().all(|&l| l > 0.0)
}

/// Serde adapter: 3×3 matrices as a row-major `[[f64; 3]; 3]`.
pub(crate) mod mat3_rows {
    use super::Mat3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat3, s: S) -> Result<S::Ok, S::Error> {
        let rows: [[f64; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat3, D::Error> {
        let rows = <[[f64; 3]; 3]>::deserialize(d)?;
        Ok(Mat3::from_fn(|i, j| rows[i][j]))
    }
}
