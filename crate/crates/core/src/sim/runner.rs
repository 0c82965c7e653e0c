use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::log::{LogRow, ScenarioLog};
use super::rig::{apply_rig_constraints, ClampFlags, RigLimits};
use super::scenario::{Scenario, SensorNoise};
use crate::control::{
    self, AttitudeController, ControlInputs, ControllerKind, IkSettings, References,
};
use crate::dynamics::{Plant, PlantInputs, TetherParams};
use crate::kinematics::TorsoKinematics;
use crate::math::Vec3;
use crate::model::{BodyState, MassSummary, RobotParams, TorsoConfig};
use crate::{Error, Result};

/// Physics step, s.
pub const PHYSICS_DT: f64 = 1e-3;
/// Physics steps per outer-loop update (200 Hz).
pub const CONTROL_DECIMATION: u64 = 5;
/// Physics steps per log row (100 Hz).
pub const LOG_DECIMATION: u64 = 10;

/// Events accumulated between two reads of [`Simulator::take_flags`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFlags {
    pub thrust_saturated: bool,
    pub moment_saturated: bool,
    pub guard: bool,
    pub clamp: ClampFlags,
}

impl StepFlags {
    pub fn merge(&mut self, other: StepFlags) {
        self.thrust_saturated |= other.thrust_saturated;
        self.moment_saturated |= other.moment_saturated;
        self.guard |= other.guard;
        self.clamp.merge(other.clamp);
    }
}

/// Immutable view of the simulator after a step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: BodyState,
    pub summary: MassSummary,
    pub inputs: PlantInputs,
    pub tether: Vec3,
    pub ee_left: Vec3,
    pub ee_right: Vec3,
    pub controller: ControllerKind,
}

struct NoiseSource {
    levels: SensorNoise,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    fn sample(&mut self, sd: f64) -> Vec3 {
        if sd == 0.0 {
            return Vec3::zeros();
        }
        let n = Normal::new(0.0, sd).expect("deviation validated non-negative");
        Vec3::new(n.sample(&mut self.rng), n.sample(&mut self.rng), n.sample(&mut self.rng))
    }

    fn corrupt(&mut self, s: &BodyState) -> BodyState {
        let mut out = s.clone();
        out.p += self.sample(self.levels.position);
        let phi = s.phi + self.sample(self.levels.attitude);
        out.set_rotation(crate::math::rotation_from_euler(&phi));
        out.omega += self.sample(self.levels.rate);
        out
    }
}

/// Fixed-rate closed loop: plant, outer loop, modeled autopilot, torso servo and rig.
pub struct Simulator {
    plant: Plant,
    attitude: AttitudeController,
    ik: IkSettings,
    head_gain: f64,
    rig: RigLimits,
    home: Vec3,
    state: BodyState,
    steps: u64,
    controller: ControllerKind,
    command: ControlInputs,
    torso_cmd: TorsoConfig,
    hand_cmd: [f64; 2],
    inputs: PlantInputs,
    flags: StepFlags,
    clamp_events: usize,
    noise: Option<NoiseSource>,
}

impl Simulator {
    pub fn new(params: RobotParams, tether: TetherParams, rig: RigLimits, controller: ControllerKind) -> Result<Self> {
        let findings = params.validate();
        if !findings.is_empty() {
            return Err(Error::InvalidParameter(findings.join("; ")));
        }
        let attitude = AttitudeController::from_params(&params);
        let ik = params.ik.settings();
        ik.validate()?;
        let head_gain = params.ik.head_gain;
        let home = Vec3::zeros();
        Ok(Simulator {
            plant: Plant::new(params, tether),
            attitude,
            ik,
            head_gain,
            rig,
            home,
            state: BodyState::at_rest(home),
            steps: 0,
            controller,
            command: ControlInputs {
                thrust: 0.0,
                phi_dot_d: Vec3::zeros(),
                guard_active: false,
            },
            torso_cmd: TorsoConfig::default(),
            hand_cmd: [0.0; 2],
            inputs: PlantInputs::default(),
            flags: StepFlags::default(),
            clamp_events: 0,
            noise: None,
        })
    }

    /// Simulator for the shipped parameter set and its own tether and rig.
    pub fn from_params(params: RobotParams, controller: ControllerKind) -> Result<Self> {
        let tether = TetherParams::from_params(&params);
        let rig = params.rig.clone();
        Self::new(params, tether, rig, controller)
    }

    pub fn set_initial_attitude(&mut self, phi: &Vec3) {
        self.state = self.state.clone().with_attitude(*phi);
    }

    pub fn set_sensor_noise(&mut self, levels: SensorNoise, seed: u64) {
        self.noise = Some(NoiseSource {
            levels,
            rng: ChaCha8Rng::seed_from_u64(seed),
        });
    }

    pub fn params(&self) -> &RobotParams {
        &self.plant.params
    }

    pub fn kinematics(&self) -> &TorsoKinematics {
        self.plant.kinematics()
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * PHYSICS_DT
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn state(&self) -> &BodyState {
        &self.state
    }

    pub fn home(&self) -> Vec3 {
        self.home
    }

    pub fn controller(&self) -> ControllerKind {
        self.controller
    }

    pub fn set_controller(&mut self, kind: ControllerKind) {
        self.controller = kind;
    }

    pub fn clamp_events(&self) -> usize {
        self.clamp_events
    }

    pub fn torso_command(&self) -> &TorsoConfig {
        &self.torso_cmd
    }

    /// Hold at home, level, with the hands where they are now.
    pub fn hold_references(&self) -> References {
        let (l, r) = self.kinematics().hand_positions(&self.state.torso);
        References::hold(self.home.z, l, r)
    }

    /// Outer-loop update: latches the thrust and rate commands, the torso
    /// joint targets and the hand closure targets.
    pub fn update_control(&mut self, refs: &References, torso_cmd: TorsoConfig) -> Result<()> {
        let measured = match self.noise.as_mut() {
            Some(n) => n.corrupt(&self.state),
            None => self.state.clone(),
        };
        let summary = self.plant.mass_summary(&self.state.torso);
        let f_t = self.plant.tether_force(&self.state)?;
        self.command = self.attitude.command(self.controller, &measured, refs, &summary, &f_t);
        self.flags.guard |= self.command.guard_active;
        self.torso_cmd = torso_cmd;
        self.hand_cmd = refs.hand_closure_d;
        Ok(())
    }

    /// Torso targets from one IK step on the hand and head references,
    /// integrated from the previous joint targets.
    pub fn ik_command(&self, refs: &References) -> Result<TorsoConfig> {
        let kin = self.kinematics();
        let q = &self.torso_cmd;
        Ok(TorsoConfig {
            q_la: control::arm_ik_step(&kin.left_arm, &q.q_la, &refs.x_d_left, &self.ik)?,
            q_ra: control::arm_ik_step(&kin.right_arm, &q.q_ra, &refs.x_d_right, &self.ik)?,
            q_h: control::head_ik_step(&kin.head, &q.q_h, &refs.head_r_d, self.head_gain, self.ik.dt)?,
        })
    }

    /// One physics tick: rate loop, saturation, plant, torso/hand servos, rig.
    pub fn physics_step(&mut self) -> Result<()> {
        let params = &self.plant.params;
        let phi_dot = self.attitude.euler_rates(&self.state);
        let moment = control::inner_loop_torque(&self.command.phi_dot_d, &phi_dot, &params.gains.b_phi);
        let (u, sat) = PlantInputs {
            thrust: self.command.thrust,
            moment,
        }
        .saturate(params.thrust_max, params.moment_max);
        let t = self.time();
        let mut next = self.plant.step(&self.state, &u, &self.torso_cmd, PHYSICS_DT).map_err(|e| match e {
            Error::NonFinite(m) => Error::NonFinite(format!("{m} at t = {t:.3} s")),
            other => other,
        })?;
        let alpha = 1.0 - (-PHYSICS_DT / params.joint_time_constant).exp();
        for (h, c) in next.hand_closure.iter_mut().zip(self.hand_cmd) {
            *h += alpha * (c - *h);
        }
        let (next, clamp) = apply_rig_constraints(&next, &self.rig, &self.home);
        if clamp.any() {
            self.clamp_events += 1;
        }
        self.flags.merge(StepFlags {
            thrust_saturated: sat.thrust,
            moment_saturated: sat.moment,
            guard: false,
            clamp,
        });
        self.state = next;
        self.inputs = u;
        self.steps += 1;
        Ok(())
    }

    /// Returns and clears the accumulated event flags.
    pub fn take_flags(&mut self) -> StepFlags {
        std::mem::take(&mut self.flags)
    }

    pub fn snapshot(&self) -> Result<Snapshot> {
        let (ee_left, ee_right) = self.kinematics().hand_positions(&self.state.torso);
        Ok(Snapshot {
            t: self.time(),
            state: self.state.clone(),
            summary: self.plant.mass_summary(&self.state.torso),
            inputs: self.inputs,
            tether: self.plant.tether_force(&self.state)?,
            ee_left,
            ee_right,
            controller: self.controller,
        })
    }

    fn log_row(&mut self, refs: &References) -> Result<LogRow> {
        let flags = self.take_flags();
        let snap = self.snapshot()?;
        Ok(LogRow::new(&snap, refs, flags))
    }
}

/// Applies every event with `t_event ≤ t` not yet consumed.
fn apply_ref_events(scenario: &Scenario, next: &mut usize, t: f64, refs: &mut References) {
    while let Some(e) = scenario.refs.get(*next) {
        if e.t > t {
            break;
        }
        if let Some(z) = e.p_z_d {
            refs.p_z_d = z;
        }
        if let Some(phi) = e.phi_d {
            refs.phi_d = phi;
        }
        if let Some(h) = e.hand_closure_d {
            refs.hand_closure_d = h;
        }
        *next += 1;
    }
}

/// Runs `scenario` at 1 kHz physics, 200 Hz control and 100 Hz logging.
pub fn run_scenario(scenario: &Scenario, params: &RobotParams, tether: &TetherParams, rig: &RigLimits) -> Result<ScenarioLog> {
    scenario.validate()?;
    let digest = params.digest();
    let params = match &scenario.com_shift {
        Some(c) => params.with_com_shift(c),
        None => params.clone(),
    };
    let mut sim = Simulator::new(params, *tether, rig.clone(), scenario.controller)?;
    if let Some(phi) = &scenario.initial_attitude {
        sim.set_initial_attitude(phi);
    }
    if let Some(noise) = &scenario.sensor_noise {
        sim.set_sensor_noise(noise.clone(), scenario.seed);
    }

    let total = (scenario.duration / PHYSICS_DT).round() as u64;
    let mut refs = sim.hold_references();
    let mut next_event = 0;
    let mut rows = Vec::with_capacity((total / LOG_DECIMATION + 1) as usize);
    for n in 0..=total {
        let t = (n as f64 * PHYSICS_DT).min(scenario.duration);
        if n % CONTROL_DECIMATION == 0 {
            apply_ref_events(scenario, &mut next_event, t, &mut refs);
            let torso = scenario.torso_at(t)?;
            sim.update_control(&refs, torso)?;
        }
        if n % LOG_DECIMATION == 0 {
            rows.push(sim.log_row(&refs)?);
        }
        if n < total {
            sim.physics_step()?;
        }
    }
    Ok(ScenarioLog {
        scenario: scenario.name.clone(),
        controller: scenario.controller,
        params_digest: digest,
        clamp_events: sim.clamp_events(),
        rows,
    })
}
