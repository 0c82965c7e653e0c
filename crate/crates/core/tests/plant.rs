use samadyn_core::dynamics::{self, Plant, PlantInputs, TetherParams};
use samadyn_core::math::{Mat3, Vec3};
use samadyn_core::model::{BodyState, MassSummary, RobotParams, TorsoConfig};

fn centred_summary() -> MassSummary {
    MassSummary {
        mass: 21.6,
        com: Vec3::zeros(),
        inertia: Mat3::new(1.5, 0.04, -0.08, 0.04, 1.8, 0.03, -0.08, 0.03, 1.1),
    }
}

#[test]
fn gravity_only_energy_drift_is_small() {
    let params = RobotParams::default_params();
    let plant = Plant::new(params.clone(), TetherParams::detached(params.l));
    let sum = centred_summary();
    let mut s = BodyState::at_rest(Vec3::new(0.0, 0.0, 2.0));
    s.v = Vec3::new(0.5, -0.3, 4.0);
    s.omega = Vec3::new(1.2, -0.8, 2.0);
    let energy = |s: &BodyState| {
        0.5 * sum.mass * s.v.norm_squared() + 0.5 * s.omega.dot(&(sum.inertia * s.omega)) + sum.mass * params.g * s.p.z
    };
    let e0 = energy(&s);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        s = plant.integrate_rigid(&s, &sum, &PlantInputs::default(), 1e-3).unwrap();
        worst = worst.max(((energy(&s) - e0) / e0).abs());
    }
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn constant_vertical_support_through_com_keeps_body_still() {
    // thrust exactly cancels gravity at level attitude: no motion at all
    let params = RobotParams::default_params();
    let plant = Plant::new(params.clone(), TetherParams::detached(params.l));
    let sum = centred_summary();
    let u = PlantInputs {
        thrust: sum.mass * params.g,
        moment: Vec3::zeros(),
    };
    let mut s = BodyState::at_rest(Vec3::new(0.0, 0.0, 1.0));
    for _ in 0..1000 {
        s = plant.integrate_rigid(&s, &sum, &u, 1e-3).unwrap();
    }
    assert!((s.p - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    assert!(s.omega.norm() < 1e-12);
}

#[test]
fn tethered_pendulum_is_restoring() {
    // displaced sideways, the cable pulls the body back toward the anchor
    let params = RobotParams::default_params();
    let tether = TetherParams::from_params(&params);
    let plant = Plant::new(params.clone(), tether);
    let mut s = BodyState::at_rest(Vec3::new(0.03, 0.0, 0.0));
    let sum = plant.mass_summary(&s.torso);
    let f_t = plant.tether_force(&s).unwrap();
    let u = PlantInputs {
        thrust: sum.mass * params.g - f_t.z,
        moment: Vec3::zeros(),
    };
    let (pdd, wd) = dynamics::accelerations(&s, &sum, &u, &f_t, &params).unwrap();
    assert!(pdd.x < 0.0);
    // cable above the origin pulls the top toward −x: nose-up pitch (negative θ̇)
    assert!(wd.y < 0.0);
    for _ in 0..200 {
        s = plant.step(&s, &u, &TorsoConfig::default(), 1e-3).unwrap();
    }
    assert!(s.p.x < 0.03);
}

#[test]
fn free_function_step_matches_plant() {
    let params = RobotParams::default_params();
    let tether = TetherParams::from_params(&params);
    let mut s = BodyState::at_rest(Vec3::zeros()).with_attitude(Vec3::new(0.05, -0.02, 0.1));
    s.omega = Vec3::new(0.1, 0.0, -0.1);
    let u = PlantInputs {
        thrust: 65.0,
        moment: Vec3::new(0.2, 0.1, 0.0),
    };
    let cmd = TorsoConfig::default();
    let a = dynamics::step(&s, &u, &cmd, 1e-3, &params, &tether).unwrap();
    let b = Plant::new(params, tether).step(&s, &u, &cmd, 1e-3).unwrap();
    assert_eq!(a, b);
}
