use serde::{Deserialize, Serialize};

use crate::math::{self, Vec3};
use crate::model::BodyState;

/// Travel limits of the indoor test frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigLimits {
    /// Roll and pitch bound, rad.
    pub max_tilt: f64,
    /// Horizontal distance from home, m.
    pub radial_limit: f64,
    /// Altitude bound about home, m.
    pub vertical_halfspan: f64,
}

impl RigLimits {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("max_tilt", self.max_tilt),
            ("radial_limit", self.radial_limit),
            ("vertical_halfspan", self.vertical_halfspan),
        ] {
            if !(v > 0.0) {
                out.push(format!("rig.{name} must be positive"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClampFlags {
    pub radial: bool,
    pub vertical: bool,
    pub tilt: bool,
}

impl ClampFlags {
    pub fn any(&self) -> bool {
        self.radial || self.vertical || self.tilt
    }

    pub fn merge(&mut self, other: ClampFlags) {
        self.radial |= other.radial;
        self.vertical |= other.vertical;
        self.tilt |= other.tilt;
    }
}

/// Projects the state back inside the rig envelope. Each clamped coordinate
/// loses the velocity component pointing further out (inelastic stop).
pub fn apply_rig_constraints(state: &BodyState, rig: &RigLimits, home: &Vec3) -> (BodyState, ClampFlags) {
    let mut out = state.clone();
    let mut flags = ClampFlags::default();

    let d = out.p - home;
    let radial = (d.x * d.x + d.y * d.y).sqrt();
    if radial > rig.radial_limit {
        flags.radial = true;
        let u = Vec3::new(d.x / radial, d.y / radial, 0.0);
        out.p.x = home.x + u.x * rig.radial_limit;
        out.p.y = home.y + u.y * rig.radial_limit;
        let v_r = out.v.dot(&u);
        if v_r > 0.0 {
            out.v -= u * v_r;
        }
    }

    if d.z.abs() > rig.vertical_halfspan {
        flags.vertical = true;
        out.p.z = home.z + rig.vertical_halfspan.copysign(d.z);
        if out.v.z * d.z > 0.0 {
            out.v.z = 0.0;
        }
    }

    let phi = out.phi;
    if phi.x.abs() > rig.max_tilt || phi.y.abs() > rig.max_tilt {
        flags.tilt = true;
        let mut rates = math::euler_rates_from_body_rates(&phi, &out.omega, std::f64::consts::FRAC_PI_2 - 1e-6);
        let mut clamped = phi;
        for i in 0..2 {
            if phi[i].abs() > rig.max_tilt {
                clamped[i] = rig.max_tilt.copysign(phi[i]);
                if rates[i] * phi[i] > 0.0 {
                    rates[i] = 0.0;
                }
            }
        }
        out.set_rotation(math::rotation_from_euler(&clamped));
        out.omega = math::euler_rate_matrix(&clamped) * rates;
    }

    (out, flags)
}
