use std::fmt::Write as _;

use super::metrics::{rms, RmsSummary};
use super::runner::{Snapshot, StepFlags};
use crate::control::{ControllerKind, References};
use crate::math::{wrap_angle, Vec3};
use crate::model::TorsoConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub p: Vec3,
    pub phi: Vec3,
    pub v: Vec3,
    pub omega: Vec3,
    /// Composite CoM in the body frame.
    pub com: Vec3,
    pub thrust: f64,
    pub moment: Vec3,
    pub torso: TorsoConfig,
    pub p_z_d: f64,
    pub phi_d: Vec3,
    pub flags: StepFlags,
}

impl LogRow {
    pub fn new(snap: &Snapshot, refs: &References, flags: StepFlags) -> Self {
        let s = &snap.state;
        LogRow {
            t: snap.t,
            p: s.p,
            phi: s.phi,
            v: s.v,
            omega: s.omega,
            com: snap.summary.com,
            thrust: snap.inputs.thrust,
            moment: snap.inputs.moment,
            torso: s.torso,
            p_z_d: refs.p_z_d,
            phi_d: refs.phi_d,
            flags,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.thrust, self.p_z_d]
            .iter()
            .chain(self.p.iter())
            .chain(self.phi.iter())
            .chain(self.v.iter())
            .chain(self.omega.iter())
            .chain(self.com.iter())
            .chain(self.moment.iter())
            .chain(self.phi_d.iter())
            .all(|x| x.is_finite())
            && self.torso.is_finite()
    }
}

/// Full time series of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLog {
    pub scenario: String,
    pub controller: ControllerKind,
    /// SHA-256 of the parameter set the run started from.
    pub params_digest: String,
    /// Physics steps on which the rig had to clamp the state.
    pub clamp_events: usize,
    pub rows: Vec<LogRow>,
}

const COLUMNS: &[&str] = &[
    "t", "p_x", "p_y", "p_z", "phi", "theta", "psi", "v_x", "v_y", "v_z", "omega_x", "omega_y", "omega_z",
    "c_x", "c_y", "c_z", "thrust", "m_x", "m_y", "m_z", "q_la1", "q_la2", "q_la3", "q_la4", "q_la5", "q_ra1",
    "q_ra2", "q_ra3", "q_ra4", "q_ra5", "q_h1", "q_h2", "p_z_d", "phi_d", "theta_d", "psi_d", "sat_thrust",
    "sat_moment", "guard", "clamp_radial", "clamp_vertical", "clamp_tilt",
];

impl ScenarioLog {
    fn series(&self, f: impl Fn(&LogRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Tracking RMS per channel. Attitude is measured against the logged
    /// attitude reference (degrees), altitude against `p_z_d`, horizontal
    /// position against home.
    pub fn rms_summary(&self) -> Result<RmsSummary> {
        let deg = |r: &LogRow, i: usize| wrap_angle(r.phi[i] - r.phi_d[i]).to_degrees();
        Ok(RmsSummary {
            theta: rms(&self.series(|r| deg(r, 1)), 0.0)?,
            phi: rms(&self.series(|r| deg(r, 0)), 0.0)?,
            psi: rms(&self.series(|r| deg(r, 2)), 0.0)?,
            p_x: rms(&self.series(|r| r.p.x), 0.0)?,
            p_y: rms(&self.series(|r| r.p.y), 0.0)?,
            p_z: rms(&self.series(|r| r.p.z - r.p_z_d), 0.0)?,
        })
    }

    pub fn duration(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    /// CSV with a provenance comment block, a header row and one line per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# scenario={}", self.scenario).unwrap();
        writeln!(out, "# controller={}", self.controller).unwrap();
        writeln!(out, "# params_sha256={}", self.params_digest).unwrap();
        writeln!(out, "{}", COLUMNS.join(",")).unwrap();
        for r in &self.rows {
            let mut vals: Vec<f64> = vec![r.t];
            vals.extend(r.p.iter());
            vals.extend(r.phi.iter());
            vals.extend(r.v.iter());
            vals.extend(r.omega.iter());
            vals.extend(r.com.iter());
            vals.push(r.thrust);
            vals.extend(r.moment.iter());
            vals.extend(r.torso.to_vec());
            vals.push(r.p_z_d);
            vals.extend(r.phi_d.iter());
            let f = &r.flags;
            vals.extend(
                [f.thrust_saturated, f.moment_saturated, f.guard, f.clamp.radial, f.clamp.vertical, f.clamp.tilt]
                    .map(|b| if b { 1.0 } else { 0.0 }),
            );
            let line: Vec<String> = vals.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", line.join(",")).unwrap();
        }
        out
    }

    /// Checks that two logs sample the same time grid.
    pub fn check_compatible(&self, other: &ScenarioLog) -> Result<()> {
        if self.rows.len() != other.rows.len() || self.duration() != other.duration() {
            return Err(Error::LogMismatch(format!(
                "{} rows over {} s vs {} rows over {} s",
                self.rows.len(),
                self.duration(),
                other.rows.len(),
                other.duration()
            )));
        }
        Ok(())
    }
}
