use nalgebra::Vector2;
use rayon::prelude::*;

use crate::controllers::{ControlMode, Controller};
use crate::error::{Error, Result};
use crate::plant::{GeneralizedState, PlantInputs};
use crate::robot_model::{arm_inverse_position, rotation_matrix, task_position, PlatformPose, RobotParams};
use crate::trajectory::{TaskReference, TaskSpec};
use crate::types::{ActuatorVector, TaskVector};

use super::config::SimConfig;
use super::summary::{summarize_window, ErrorSummary};

/// One logged control tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunRecord {
    pub t: f64,
    pub reference: TaskVector,
    pub actual: TaskVector,
    pub tau: ActuatorVector,
    pub tau_d: ActuatorVector,
    pub q_est: ActuatorVector,
    pub integral: ActuatorVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub mode: ControlMode,
    pub control_dt: f64,
    pub records: Vec<RunRecord>,
}

impl RunResult {
    pub fn duration(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }
}

/// Plant state matching the reference at `t = 0`: F on the path with the
/// reference heading and velocity, the arm at rest with the tip at the
/// task's initial tip position (or the reference tip).
pub fn initial_state(params: &RobotParams, task: &TaskSpec, reference: &TaskReference) -> Result<GeneralizedState> {
    let pos = reference.pos;
    let pose = PlatformPose { x_f: pos.x_f, y_f: pos.y_f, phi: pos.phi };
    let rot_t = rotation_matrix(pose.phi).transpose();

    let forward = (rot_t * Vector2::new(reference.vel.x_f, reference.vel.y_f)).x;
    let turn = reference.vel.phi;
    let wheel_l = (forward - params.b * turn) / params.r;
    let wheel_r = (forward + params.b * turn) / params.r;

    let tip = task.initial_tip().unwrap_or([pos.x_e, pos.y_e]);
    let local = rot_t * (Vector2::new(tip[0], tip[1]) - Vector2::new(pose.x_f, pose.y_f));
    // Tips to the right of the heading sit on the positive elbow branch.
    let arm = arm_inverse_position(params, local, local.y <= 0.0)?;

    Ok(GeneralizedState { pose, arm, nu: ActuatorVector::new(wheel_l, wheel_r, 0.0, 0.0), wheel_angles: [0.0, 0.0] })
}

/// Execute one closed-loop simulation.
pub fn run(config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    let plant = config.plant();
    let task = config.task_spec()?;
    let schedule = config.disturbance.schedule();
    let substeps = config.substeps()?;
    let ticks = config.ticks()?;
    let (dt, control_dt) = (config.sim.dt, config.sim.control_dt);

    let mut controller = Controller::new(config.control, config.sim.seed)?;
    let mut state = initial_state(&config.robot, &task, &task.reference_at(0.0)?)?;
    let mut records = Vec::with_capacity(ticks + 1);

    for tick in 0..=ticks {
        let t = tick as f64 * control_dt;
        let at_tick = |source: Error| Error::AtTick { tick, t, source: Box::new(source) };
        let reference = task.reference_at(t).map_err(at_tick)?;
        let out = controller.tick(&plant, &state, &reference, control_dt).map_err(at_tick)?;
        records.push(RunRecord {
            t,
            reference: reference.pos,
            actual: task_position(&config.robot, &state.pose, &state.arm),
            tau: out.tau,
            tau_d: schedule.sample(t),
            q_est: out.q_est,
            integral: out.integral,
        });
        if tick == ticks {
            break;
        }
        for sub in 0..substeps {
            let inputs = PlantInputs { tau: out.tau, tau_d: schedule.sample(t + sub as f64 * dt) };
            state = plant.step(&state, &inputs, dt).map_err(at_tick)?;
        }
    }

    Ok(RunResult { mode: config.control.mode, control_dt, records })
}

/// Result of one mode in a side-by-side comparison.
#[derive(Debug, Clone)]
pub struct ModeRun {
    pub mode: ControlMode,
    pub result: RunResult,
    pub summary: ErrorSummary,
}

/// Run every control mode on the same configuration, in parallel. Results
/// come back in `ControlMode::ALL` order.
pub fn compare(config: &SimConfig) -> Result<Vec<ModeRun>> {
    ControlMode::ALL
        .par_iter()
        .map(|&mode| {
            let mut cfg = config.clone();
            cfg.control.mode = mode;
            let result = run(&cfg)?;
            let summary = summarize_window(&result, cfg.sim.settle_time, f64::INFINITY)?;
            Ok(ModeRun { mode, result, summary })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot_model::arm_tip_position;

    fn short(mode: ControlMode, duration: f64) -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.control.mode = mode;
        cfg.sim.duration = duration;
        cfg
    }

    #[test]
    fn row_count_contract() {
        let res = run(&short(ControlMode::Rac, 1.0)).unwrap();
        assert_eq!(res.records.len(), 1001);
        assert_eq!(res.records[0].t, 0.0);
        assert!((res.duration() - 1.0).abs() < 1e-12);
        for (k, r) in res.records.iter().enumerate() {
            assert_eq!(r.t, k as f64 * 1e-3);
        }
    }

    #[test]
    fn coarser_control_period() {
        let mut cfg = short(ControlMode::Rac, 0.5);
        cfg.sim.control_dt = 2e-3;
        assert_eq!(run(&cfg).unwrap().records.len(), 251);
    }

    #[test]
    fn initial_state_places_tip() {
        let cfg = SimConfig::default();
        let task = cfg.task_spec().unwrap();
        let r0 = task.reference_at(0.0).unwrap();
        let s = initial_state(&cfg.robot, &task, &r0).unwrap();
        let tip = arm_tip_position(&cfg.robot, &s.pose, s.arm.theta1, s.arm.theta2);
        assert!((tip.x - 10.55).abs() < 1e-12 && (tip.y - 0.35).abs() < 1e-12);
        assert!(s.arm.theta2 > 0.0);
        // Wheel rates reproduce the reference forward speed and turn rate.
        let v = crate::robot_model::task_velocity(&cfg.robot, &s.pose, &s.arm, &s.nu);
        let (sin, cos) = s.pose.phi.sin_cos();
        let forward = |x: f64, y: f64| x * cos + y * sin;
        assert!((forward(v.x_f, v.y_f) - forward(r0.vel.x_f, r0.vel.y_f)).abs() < 1e-12);
        assert!((v.phi - r0.vel.phi).abs() < 1e-12);
    }

    #[test]
    fn failures_carry_tick() {
        let mut cfg = short(ControlMode::Rac, 0.2);
        cfg.control.rac.kp = [1e12; 5];
        cfg.control.rac.kd = [1e12; 5];
        match run(&cfg) {
            Err(Error::AtTick { tick, .. }) => assert!(tick <= 200),
            other => panic!("expected a tick-tagged failure, got {other:?}"),
        }
    }
}
