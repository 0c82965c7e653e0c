//! Scenario scripting, the test-rig envelope, the closed-loop runner, logs and reports.

mod log;
mod metrics;
mod report;
mod rig;
mod runner;
mod scenario;

pub use log::{LogRow, ScenarioLog};
pub use metrics::{rms, RmsSummary};
pub use report::{compare_report, ratio, Comparison, HARDWARE_PITCH_RMS};
pub use rig::{apply_rig_constraints, ClampFlags, RigLimits};
pub use runner::{
    run_scenario, Simulator, Snapshot, StepFlags, CONTROL_DECIMATION, LOG_DECIMATION, PHYSICS_DT,
};
pub use scenario::{scripted_motion, RefEvent, Scenario, SensorNoise, Waypoint};

use crate::control::ControllerKind;
use crate::dynamics::TetherParams;
use crate::model::RobotParams;
use crate::Result;

/// Runs `scenario` once per controller and tabulates proposed against baseline.
pub fn compare_controllers(scenario: &Scenario, params: &RobotParams) -> Result<(Comparison, ScenarioLog, ScenarioLog)> {
    let tether = TetherParams::from_params(params);
    let run = |kind| {
        let sc = Scenario {
            controller: kind,
            ..scenario.clone()
        };
        run_scenario(&sc, params, &tether, &params.rig)
    };
    let proposed = run(ControllerKind::Proposed)?;
    let baseline = run(ControllerKind::Baseline)?;
    Ok((compare_report(&proposed, &baseline)?, proposed, baseline))
}
