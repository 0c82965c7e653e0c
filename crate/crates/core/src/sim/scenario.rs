use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::ControllerKind;
use crate::math::Vec3;
use crate::model::TorsoConfig;
use crate::{Error, Result};

/// Torso pose to reach at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub torso: TorsoConfig,
}

/// Piecewise-constant reference change taking effect at `t`. Omitted fields
/// keep their previous value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RefEvent {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_z_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_d: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hand_closure_d: Option<[f64; 2]>,
}

/// Zero-mean Gaussian noise on the state seen by the outer loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorNoise {
    /// Position standard deviation, m.
    pub position: f64,
    /// Euler-angle standard deviation, rad.
    pub attitude: f64,
    /// Body-rate standard deviation, rad/s.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub duration: f64,
    #[serde(default)]
    pub controller: ControllerKind,
    #[serde(default)]
    pub timeline: Vec<Waypoint>,
    #[serde(default)]
    pub refs: Vec<RefEvent>,
    #[serde(default)]
    pub seed: u64,
    /// Extra composite-CoM offset applied to the drone body, m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub com_shift: Option<Vec3>,
    /// Initial Euler angles, rad.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_attitude: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_noise: Option<SensorNoise>,
}

const SHOULDER_FORWARD: usize = 1;

impl Scenario {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be positive (got {})", self.duration));
        }
        for w in &self.timeline {
            if !(w.t >= 0.0) || !w.torso.is_finite() {
                return bad(format!("waypoint at t = {} is invalid", w.t));
            }
        }
        for pair in self.timeline.windows(2) {
            if !(pair[1].t > pair[0].t) {
                return bad(format!("waypoint times must increase strictly ({} then {})", pair[0].t, pair[1].t));
            }
        }
        if let Some(last) = self.timeline.last() {
            if last.t > self.duration {
                return bad(format!("last waypoint at {} s exceeds duration {} s", last.t, self.duration));
            }
        }
        for e in &self.refs {
            if !(e.t >= 0.0 && e.t <= self.duration) {
                return bad(format!("reference event at t = {} outside [0, duration]", e.t));
            }
            if let Some(h) = e.hand_closure_d {
                if !h.iter().all(|x| (0.0..=1.0).contains(x)) {
                    return bad("hand closure must lie in [0, 1]".into());
                }
            }
            let finite = e.p_z_d.is_none_or(f64::is_finite) && e.phi_d.is_none_or(|p| p.iter().all(|x| x.is_finite()));
            if !finite {
                return bad(format!("reference event at t = {} is not finite", e.t));
            }
        }
        for pair in self.refs.windows(2) {
            if pair[1].t < pair[0].t {
                return bad("reference events must be sorted by time".into());
            }
        }
        if let Some(c) = self.com_shift {
            if !c.iter().all(|x| x.is_finite()) {
                return bad("com_shift must be finite".into());
            }
        }
        if let Some(n) = &self.sensor_noise {
            if !(n.position >= 0.0 && n.attitude >= 0.0 && n.rate >= 0.0) {
                return bad("sensor noise deviations must be non-negative".into());
            }
        }
        Ok(())
    }

    /// Scripted torso pose at `t`.
    pub fn torso_at(&self, t: f64) -> Result<TorsoConfig> {
        scripted_motion(&self.timeline, self.duration, t)
    }

    /// Hold at home with the arms still.
    pub fn hold(duration: f64) -> Self {
        Scenario {
            name: "hold".into(),
            duration,
            controller: ControllerKind::Proposed,
            timeline: vec![Waypoint {
                t: 0.0,
                torso: TorsoConfig::default(),
            }],
            refs: Vec::new(),
            seed: 0,
            com_shift: None,
            initial_attitude: None,
            sensor_noise: None,
        }
    }

    /// Shoulder-forward sweeps: left arm 0 → 60° → 0, then both arms together.
    pub fn benchmark() -> Self {
        let lift = 60f64.to_radians();
        let pose = |left: bool, right: bool| {
            let mut q = TorsoConfig::default();
            if left {
                q.q_la[SHOULDER_FORWARD] = lift;
            }
            if right {
                q.q_ra[SHOULDER_FORWARD] = lift;
            }
            q
        };
        let timeline = [
            (0.0, pose(false, false)),
            (2.0, pose(false, false)),
            (7.0, pose(true, false)),
            (12.0, pose(false, false)),
            (17.0, pose(true, true)),
            (22.0, pose(false, false)),
        ]
        .into_iter()
        .map(|(t, torso)| Waypoint { t, torso })
        .collect();
        Scenario {
            name: "benchmark".into(),
            duration: 25.0,
            timeline,
            ..Self::hold(25.0)
        }
    }
}

/// Cubic Hermite blend between waypoints with zero velocity at each of them.
/// The first waypoint is held before its time and the last one after.
pub fn scripted_motion(timeline: &[Waypoint], duration: f64, t: f64) -> Result<TorsoConfig> {
    if !(0.0..=duration).contains(&t) {
        return Err(Error::TimeOutOfRange { t, start: 0.0, end: duration });
    }
    let (first, last) = match (timeline.first(), timeline.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Ok(TorsoConfig::default()),
    };
    if t <= first.t {
        return Ok(first.torso);
    }
    if t >= last.t {
        return Ok(last.torso);
    }
    let k = timeline.partition_point(|w| w.t <= t);
    let (a, b) = (&timeline[k - 1], &timeline[k]);
    if t == a.t {
        return Ok(a.torso);
    }
    let s = (t - a.t) / (b.t - a.t);
    let h = s * s * (3.0 - 2.0 * s);
    Ok(a.torso.zip_map(&b.torso, |x, y| x + (y - x) * h))
}
