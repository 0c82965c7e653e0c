use std::fmt::Write as _;

use super::log::ScenarioLog;
use super::metrics::RmsSummary;
use crate::Result;

/// Pitch RMS measured on the physical rig (autopilot only, whole-body), deg.
pub const HARDWARE_PITCH_RMS: (f64, f64) = (2.0367, 1.3218);

/// Side-by-side RMS table of two runs of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scenario: String,
    pub params_digest: String,
    pub labels: (String, String),
    pub a: RmsSummary,
    pub b: RmsSummary,
    pub clamp_events: (usize, usize),
}

/// `a / b`, defined as 1 when both are zero.
pub fn ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        a / b
    }
}

impl Comparison {
    pub fn ratios(&self) -> [f64; 6] {
        let (a, b) = (self.a.values(), self.b.values());
        std::array::from_fn(|i| ratio(a[i], b[i]))
    }

    pub fn to_text(&self) -> String {
        let (la, lb) = &self.labels;
        let mut out = String::new();
        writeln!(out, "scenario: {}", self.scenario).unwrap();
        writeln!(out, "params_sha256: {}", self.params_digest).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "{:<8} {:<5} {:>14} {:>14} {:>10}", "channel", "unit", la, lb, "ratio").unwrap();
        let (a, b, r) = (self.a.values(), self.b.values(), self.ratios());
        for (i, (name, unit)) in RmsSummary::CHANNELS.iter().enumerate() {
            writeln!(out, "{:<8} {:<5} {:>14.6} {:>14.6} {:>10.4}", name, unit, a[i], b[i], r[i]).unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "rig clamp events: {} {}, {} {}", la, self.clamp_events.0, lb, self.clamp_events.1).unwrap();
        let (hw_base, hw_prop) = HARDWARE_PITCH_RMS;
        writeln!(
            out,
            "hardware pitch RMS for context: baseline {hw_base} deg, proposed {hw_prop} deg, ratio {:.4}",
            hw_prop / hw_base
        )
        .unwrap();
        out
    }

    pub fn to_csv(&self) -> String {
        let (la, lb) = &self.labels;
        let mut out = String::new();
        writeln!(out, "channel,unit,{la},{lb},ratio").unwrap();
        let (a, b, r) = (self.a.values(), self.b.values(), self.ratios());
        for (i, (name, unit)) in RmsSummary::CHANNELS.iter().enumerate() {
            writeln!(out, "{name},{unit},{},{},{}", a[i], b[i], r[i]).unwrap();
        }
        out
    }
}

/// Compares two runs sampled on the same grid; ratios are `a / b`.
pub fn compare_report(log_a: &ScenarioLog, log_b: &ScenarioLog) -> Result<Comparison> {
    log_a.check_compatible(log_b)?;
    Ok(Comparison {
        scenario: log_a.scenario.clone(),
        params_digest: log_a.params_digest.clone(),
        labels: (log_a.controller.to_string(), log_b.controller.to_string()),
        a: log_a.rms_summary()?,
        b: log_b.rms_summary()?,
        clamp_events: (log_a.clamp_events, log_b.clamp_events),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ControllerKind;
    use crate::math::Vec3;
    use crate::model::TorsoConfig;
    use crate::sim::log::LogRow;
    use crate::sim::StepFlags;
    use crate::Error;

    fn synthetic(amplitude: f64, n: usize, kind: ControllerKind) -> ScenarioLog {
        let rows = (0..n)
            .map(|k| {
                let t = k as f64 * 0.01;
                let s = amplitude * (2.0 * std::f64::consts::PI * k as f64 / n as f64).sin();
                LogRow {
                    t,
                    p: Vec3::new(s, s, s),
                    phi: Vec3::new(s, s, s).map(f64::to_radians),
                    v: Vec3::zeros(),
                    omega: Vec3::zeros(),
                    com: Vec3::zeros(),
                    thrust: 0.0,
                    moment: Vec3::zeros(),
                    torso: TorsoConfig::default(),
                    p_z_d: 0.0,
                    phi_d: Vec3::zeros(),
                    flags: StepFlags::default(),
                }
            })
            .collect();
        ScenarioLog {
            scenario: "synthetic".into(),
            controller: kind,
            params_digest: "0".into(),
            clamp_events: 0,
            rows,
        }
    }

    #[test]
    fn self_comparison_has_unit_ratios() {
        let log = synthetic(0.3, 1000, ControllerKind::Proposed);
        let c = compare_report(&log, &log).unwrap();
        assert!(c.ratios().iter().all(|&r| r == 1.0));
        let zero = synthetic(0.0, 10, ControllerKind::Proposed);
        assert!(compare_report(&zero, &zero).unwrap().ratios().iter().all(|&r| r == 1.0));
    }

    #[test]
    fn sinusoidal_rms() {
        let a = synthetic(0.4, 4000, ControllerKind::Proposed);
        let b = synthetic(0.8, 4000, ControllerKind::Baseline);
        let c = compare_report(&a, &b).unwrap();
        for v in c.a.values() {
            assert!((v - 0.4 / 2f64.sqrt()).abs() < 1e-6, "{v}");
        }
        for r in c.ratios() {
            assert!((r - 0.5).abs() < 1e-9);
        }
        assert!(c.to_text().contains("proposed"));
        assert_eq!(c.to_csv().lines().count(), 7);
    }

    #[test]
    fn mismatched_durations_are_rejected() {
        let a = synthetic(0.4, 100, ControllerKind::Proposed);
        let b = synthetic(0.4, 120, ControllerKind::Baseline);
        assert!(matches!(compare_report(&a, &b), Err(Error::LogMismatch(_))));
    }
}
