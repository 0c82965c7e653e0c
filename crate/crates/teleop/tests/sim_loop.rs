use samadyn_core::control::ControllerKind;
use samadyn_core::dynamics::TetherParams;
use samadyn_core::math::Vec3;
use samadyn_core::model::RobotParams;
use samadyn_core::sim::{run_scenario, Scenario};
use samadyn_teleop::protocol::{CommandMessage, StateMessage};
use samadyn_teleop::SimLoop;

fn ticks(sim: &mut SimLoop, n: usize) {
    for _ in 0..n {
        sim.tick().unwrap();
    }
}

#[test]
fn idle_loop_matches_offline_hold_bitwise() {
    let params = RobotParams::default_params();
    let log = run_scenario(&Scenario::hold(2.0), &params, &TetherParams::from_params(&params), &params.rig).unwrap();
    let mut sim = SimLoop::new(params).unwrap();
    for (k, row) in log.rows.iter().enumerate().skip(1) {
        ticks(&mut sim, 10);
        let s = sim.simulator().state();
        assert_eq!(s.p, row.p, "row {k}");
        assert_eq!(s.phi, row.phi, "row {k}");
        assert_eq!(s.omega, row.omega, "row {k}");
    }
}

#[test]
fn yaw_rate_command_turns_the_body() {
    let mut sim = SimLoop::new(RobotParams::default_params()).unwrap();
    ticks(&mut sim, 100);
    sim.apply(&CommandMessage::YawRate(0.1));
    let mut prev = sim.simulator().state().phi.z;
    let mut rose = 0;
    for _ in 0..50 {
        ticks(&mut sim, 10);
        let psi = sim.simulator().state().phi.z;
        assert!(psi >= prev - 1e-12, "{psi} < {prev}");
        rose += (psi > prev) as usize;
        prev = psi;
    }
    assert!(rose > 40);
    assert!(prev > 0.0);
}

#[test]
fn controller_select_switches_static_bias() {
    // a 5 cm CoM offset: the compensating law stays level, the baseline leans
    let params = RobotParams::default_params().with_com_shift(&Vec3::new(0.05, 0.0, 0.0));
    let tilt = |kind: ControllerKind| {
        let mut sim = SimLoop::new(params.clone()).unwrap();
        sim.apply(&CommandMessage::ControllerSelect(kind));
        ticks(&mut sim, 15_000);
        let phi = sim.simulator().state().phi;
        phi.x.hypot(phi.y).to_degrees()
    };
    let proposed = tilt(ControllerKind::Proposed);
    let baseline = tilt(ControllerKind::Baseline);
    assert!(proposed < 0.5, "proposed {proposed}°");
    assert!(baseline > 3.0, "baseline {baseline}°");
}

#[test]
fn hand_target_and_closure_are_tracked() {
    let mut sim = SimLoop::new(RobotParams::default_params()).unwrap();
    let start = sim.state_message().unwrap().ee_left;
    let goal = [start[0] + 0.1, start[1], start[2] + 0.1];
    sim.apply(&CommandMessage::EeTargetLeft(goal));
    sim.apply(&CommandMessage::HandClosureLeft(1.0));
    ticks(&mut sim, 3000);
    let msg = sim.state_message().unwrap();
    let err = Vec3::from(msg.ee_left) - Vec3::from(goal);
    assert!(err.norm() < 5e-3, "{err}");
    assert!(msg.hand_closure[0] > 0.95);
    assert_eq!(msg.hand_closure[1], 0.0);
}

#[test]
fn state_message_round_trips() {
    let mut sim = SimLoop::new(RobotParams::default_params()).unwrap();
    ticks(&mut sim, 37);
    let msg = sim.state_message().unwrap();
    let text = msg.to_json();
    let back: StateMessage = serde_json::from_str(&text).unwrap();
    assert_eq!(back, msg);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["t", "p", "Phi", "omega", "q_lb", "com", "thrust", "tether", "ee_left", "ee_right", "hand_closure", "clamp_flags"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["q_lb"].as_array().unwrap().len(), 12);
}
