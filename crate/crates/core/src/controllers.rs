//! Outer resolved-acceleration loop and the inner active-force loops.
//!
//! Every control tick the outer loop turns task-space tracking errors into
//! commanded task accelerations, which are resolved onto the four actuators.
//! The selected inner loop then produces motor torques:
//!
//! * `RAC`: resolved accelerations scaled by the diagonal of the true reduced
//!   inertia, with no disturbance compensation.
//! * `RAC_AFC`: `tau = IN (acc_ref - acc_meas) + T_meas`, i.e. `IN acc_ref + Q'`
//!   with the disturbance estimate `Q' = T_meas - IN acc_meas`.
//! * `RAC_PIAFC`: `tau = IN_P e + IN_I int(e) dt + T_meas`, `e = acc_ref - acc_meas`.
//!
//! `T_meas` is the previous tick's command read back through the torque or
//! current sensor.

use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{Accelerometer, GeneralizedState, Plant};
use crate::robot_model::{
    arm_inverse_velocity, arm_jacobian, arm_jacobian_dot, platform_block, platform_inverse_acceleration,
    rotation_matrix, task_position, task_velocity, RobotParams, DEFAULT_EPS_SING,
};
use crate::trajectory::TaskReference;
use crate::types::{ActuatorVector, TaskVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControlMode {
    #[serde(rename = "RAC")]
    Rac,
    #[serde(rename = "RAC_AFC")]
    RacAfc,
    #[serde(rename = "RAC_PIAFC")]
    RacPiafc,
}

impl ControlMode {
    pub const ALL: [ControlMode; 3] = [ControlMode::Rac, ControlMode::RacAfc, ControlMode::RacPiafc];

    pub fn name(self) -> &'static str {
        match self {
            ControlMode::Rac => "RAC",
            ControlMode::RacAfc => "RAC_AFC",
            ControlMode::RacPiafc => "RAC_PIAFC",
        }
    }
}

impl std::fmt::Display for ControlMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ControlMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "RAC" => Ok(ControlMode::Rac),
            "RAC_AFC" | "AFC" => Ok(ControlMode::RacAfc),
            "RAC_PIAFC" | "PIAFC" => Ok(ControlMode::RacPiafc),
            _ => Err(Error::Config(format!("unknown control mode '{s}'"))),
        }
    }
}

/// Diagonal RAC gains in task order `(xF, yF, phi, xE, yE)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RacGains {
    pub kp: [f64; 5],
    pub kd: [f64; 5],
}

impl RacGains {
    /// The tuned gains; heading gains are deliberately tiny.
    pub fn standard() -> Self {
        Self { kp: [450.0, 450.0, 0.004, 325.0, 325.0], kd: [320.0, 320.0, 0.001, 260.0, 260.0] }
    }
}

impl Default for RacGains {
    fn default() -> Self {
        Self::standard()
    }
}

/// Inner-loop inertia gains, stored in actuator order
/// `(wheelL, wheelR, joint1, joint2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerLoopGains {
    /// `IN` for the AFC mode, kg·m².
    pub in_afc: ActuatorVector,
    /// `IN_P`, kg·m².
    pub in_p: ActuatorVector,
    /// `IN_I`, kg·m²/s.
    pub in_i: ActuatorVector,
}

impl InnerLoopGains {
    /// Diagonals listed as (joint1, joint2, wheelL, wheelR).
    pub fn from_joint_major(in_afc: [f64; 4], in_p: [f64; 4], in_i: [f64; 4]) -> Self {
        let reorder = |a: [f64; 4]| ActuatorVector::new(a[2], a[3], a[0], a[1]);
        Self { in_afc: reorder(in_afc), in_p: reorder(in_p), in_i: reorder(in_i) }
    }

    pub fn standard() -> Self {
        Self::from_joint_major([0.0925, 0.0925, 2.4, 2.4], [0.125, 0.125, 2.4, 2.4], [0.03, 0.03, 0.01, 0.01])
    }

    /// PIAFC gains that collapse onto plain AFC.
    pub fn degenerate_from_afc(in_afc: ActuatorVector) -> Self {
        Self { in_afc, in_p: in_afc, in_i: ActuatorVector::ZERO }
    }
}

impl Default for InnerLoopGains {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    TorqueSensor,
    #[default]
    CurrentSensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementModel {
    pub sensor: SensorKind,
    /// Motor torque constants, N·m/A (current sensor only).
    pub kt: ActuatorVector,
    /// Per-channel sensor noise: N·m for a torque sensor, A for a current sensor.
    pub noise: ActuatorVector,
}

impl Default for MeasurementModel {
    fn default() -> Self {
        Self { sensor: SensorKind::CurrentSensor, kt: ActuatorVector::splat(0.5), noise: ActuatorVector::ZERO }
    }
}

impl MeasurementModel {
    pub fn validate(&self) -> Result<()> {
        if self.sensor == SensorKind::CurrentSensor && self.kt.to_array().iter().any(|&k| !(k > 0.0)) {
            return Err(Error::InvalidParam("motor torque constants must be > 0 with a current sensor".into()));
        }
        if self.noise.to_array().iter().any(|&s| !(s >= 0.0)) {
            return Err(Error::InvalidParam("sensor noise must be >= 0".into()));
        }
        Ok(())
    }

    /// Read an applied torque through the sensor.
    pub fn read(&self, applied: &ActuatorVector, rng: &mut ChaCha8Rng) -> SensorReading {
        let mut noisy = |clean: ActuatorVector| {
            let mut out = clean;
            for i in 0..4 {
                if self.noise[i] > 0.0 {
                    out[i] += Normal::new(0.0, self.noise[i]).expect("validated sigma").sample(rng);
                }
            }
            out
        };
        match self.sensor {
            SensorKind::TorqueSensor => SensorReading::Torque(noisy(*applied)),
            SensorKind::CurrentSensor => SensorReading::Current(noisy(applied.zip_with(self.kt, |t, k| t / k))),
        }
    }

    /// Torque implied by a reading.
    pub fn torque_of(&self, reading: &SensorReading) -> ActuatorVector {
        match *reading {
            SensorReading::Torque(t) => t,
            SensorReading::Current(i) => i.hadamard(self.kt),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorReading {
    Torque(ActuatorVector),
    Current(ActuatorVector),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState {
    /// Accumulated acceleration error, rad/s.
    pub integral_acc: ActuatorVector,
    pub last_tau_measured: ActuatorVector,
}

/// Commanded task accelerations from the PD tracking law.
pub fn rac_task_acceleration(
    gains: &RacGains,
    reference: &TaskReference,
    actual_pos: &TaskVector,
    actual_vel: &TaskVector,
) -> TaskVector {
    let (rp, rv, ra) = (reference.pos.to_array(), reference.vel.to_array(), reference.acc.to_array());
    let (ap, av) = (actual_pos.to_array(), actual_vel.to_array());
    TaskVector::from_array(std::array::from_fn(|i| {
        ra[i] + gains.kd[i] * (rv[i] - av[i]) + gains.kp[i] * (rp[i] - ap[i])
    }))
}

/// Actuator accelerations realizing the commanded task accelerations.
///
/// F is resolved exactly (velocity-product terms included), the heading
/// command is superposed differentially on the wheels, and the joints solve
/// the differentiated tip map given the platform motion actually produced.
pub fn resolve_to_actuators(
    params: &RobotParams,
    state: &GeneralizedState,
    task_acc: &TaskVector,
    eps_sing: f64,
) -> Result<ActuatorVector> {
    let phi = state.pose.phi;
    let rot = rotation_matrix(phi);
    let block = platform_block(params);
    let wheel_rates = Vector2::new(state.nu.wheel_l, state.nu.wheel_r);
    let heading = params.heading_row();
    let phi_dot = heading.dot(&wheel_rates);
    let perp = |v: Vector2<f64>| Vector2::new(-v.y, v.x);

    let f_bias = phi_dot * rot * perp(block * wheel_rates);
    let wheel_acc = platform_inverse_acceleration(
        params,
        phi,
        Vector2::new(task_acc.x_f, task_acc.y_f) - f_bias,
        task_acc.phi,
    )?;
    let f_acc = f_bias + rot * block * wheel_acc;
    let phi_acc = heading.dot(&wheel_acc);

    let (t1, t2) = (state.arm.theta1, state.arm.theta2);
    let joint_rates = Vector2::new(state.nu.joint1, state.nu.joint2);
    let abs_rates = Vector2::new(state.nu.joint1 + phi_dot, state.nu.joint2);
    let jac = arm_jacobian(params, t1, t2);
    let jac_dot = arm_jacobian_dot(params, t1, t2, joint_rates);
    let tip_rhs = rot.transpose() * (Vector2::new(task_acc.x_e, task_acc.y_e) - f_acc)
        - phi_dot * perp(jac * abs_rates)
        - jac_dot * abs_rates;
    let abs_acc = arm_inverse_velocity(params, t1, t2, tip_rhs, eps_sing)?;

    Ok(ActuatorVector::new(wheel_acc.x, wheel_acc.y, abs_acc.x - phi_acc, abs_acc.y))
}

/// `Q' = T_meas - IN' acc_meas`.
pub fn estimate_disturbance(
    model: &MeasurementModel,
    in_eff: &ActuatorVector,
    reading: &SensorReading,
    acc_meas: &ActuatorVector,
) -> ActuatorVector {
    model.torque_of(reading) - in_eff.hadamard(*acc_meas)
}

/// `tau = IN (acc_ref - acc_meas) + T_meas`, equal to `IN acc_ref + Q'`.
pub fn afc_torque(
    in_afc: &ActuatorVector,
    acc_ref: &ActuatorVector,
    acc_meas: &ActuatorVector,
    measured_torque: &ActuatorVector,
) -> ActuatorVector {
    in_afc.hadamard(*acc_ref - *acc_meas) + *measured_torque
}

/// `tau = IN_P e + IN_I int(e) + T_meas`. The integral advances by the
/// rectangle rule before use and is clamped to `+-windup`.
pub fn piafc_torque(
    gains: &InnerLoopGains,
    state: &mut ControllerState,
    acc_ref: &ActuatorVector,
    acc_meas: &ActuatorVector,
    measured_torque: &ActuatorVector,
    dt: f64,
    windup: f64,
) -> ActuatorVector {
    let error = *acc_ref - *acc_meas;
    state.integral_acc = (state.integral_acc + error * dt).map(|v| v.clamp(-windup, windup));
    (gains.in_p.hadamard(error) + gains.in_i.hadamard(state.integral_acc)) + *measured_torque
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub mode: ControlMode,
    pub rac: RacGains,
    pub inner: InnerLoopGains,
    pub measurement: MeasurementModel,
    /// Accelerometer noise standard deviation, rad/s².
    pub accel_noise: f64,
    /// Anti-windup clamp on the integral state.
    pub windup: f64,
    pub eps_sing: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            mode: ControlMode::RacPiafc,
            rac: RacGains::standard(),
            inner: InnerLoopGains::standard(),
            measurement: MeasurementModel::default(),
            accel_noise: 0.0,
            windup: 1e3,
            eps_sing: DEFAULT_EPS_SING,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, vals: &[f64]| {
            if vals.iter().any(|&v| !(v >= 0.0)) {
                Err(Error::InvalidParam(format!("{name} entries must be >= 0")))
            } else {
                Ok(())
            }
        };
        nonneg("control.rac.kp", &self.rac.kp)?;
        nonneg("control.rac.kd", &self.rac.kd)?;
        nonneg("control.inner.in_afc", &self.inner.in_afc.to_array())?;
        nonneg("control.inner.in_p", &self.inner.in_p.to_array())?;
        nonneg("control.inner.in_i", &self.inner.in_i.to_array())?;
        if !(self.accel_noise >= 0.0) || !(self.windup > 0.0) || !(self.eps_sing > 0.0) {
            return Err(Error::InvalidParam("accel_noise >= 0, windup > 0 and eps_sing > 0 required".into()));
        }
        self.measurement.validate()
    }
}

/// Everything the controller computed on one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlOutput {
    pub tau: ActuatorVector,
    pub task_acc: TaskVector,
    pub acc_ref: ActuatorVector,
    pub acc_meas: ActuatorVector,
    pub q_est: ActuatorVector,
    pub integral: ActuatorVector,
}

/// One controller instance with its sensors and memory.
#[derive(Debug, Clone)]
pub struct Controller {
    pub config: ControllerConfig,
    pub state: ControllerState,
    accelerometer: Accelerometer,
    sensor_rng: ChaCha8Rng,
    last_command: ActuatorVector,
    prev_nu: Option<ActuatorVector>,
}

impl Controller {
    pub fn new(config: ControllerConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state: ControllerState::default(),
            accelerometer: Accelerometer::new(config.accel_noise, seed)?,
            sensor_rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15)),
            last_command: ActuatorVector::ZERO,
            prev_nu: None,
        })
    }

    /// Compute the torque command for the current plant state. `dt` is the
    /// control period.
    pub fn tick(
        &mut self,
        plant: &Plant,
        state: &GeneralizedState,
        reference: &TaskReference,
        dt: f64,
    ) -> Result<ControlOutput> {
        let cfg = self.config;
        let params = &plant.robot;
        let pos = task_position(params, &state.pose, &state.arm);
        let vel = task_velocity(params, &state.pose, &state.arm, &state.nu);
        let task_acc = rac_task_acceleration(&cfg.rac, reference, &pos, &vel);
        let acc_ref = resolve_to_actuators(params, state, &task_acc, cfg.eps_sing)?;

        let acc_meas = match self.prev_nu {
            Some(prev) => self.accelerometer.measure(&prev, &state.nu, dt),
            None => ActuatorVector::ZERO,
        };
        self.prev_nu = Some(state.nu);

        let (tau, q_est) = match cfg.mode {
            ControlMode::Rac => {
                let diag = plant.reduced_dynamics(state).mass_diagonal();
                (diag.hadamard(acc_ref), ActuatorVector::ZERO)
            }
            ControlMode::RacAfc | ControlMode::RacPiafc => {
                let reading = cfg.measurement.read(&self.last_command, &mut self.sensor_rng);
                let measured = cfg.measurement.torque_of(&reading);
                self.state.last_tau_measured = measured;
                if cfg.mode == ControlMode::RacAfc {
                    let q = estimate_disturbance(&cfg.measurement, &cfg.inner.in_afc, &reading, &acc_meas);
                    (afc_torque(&cfg.inner.in_afc, &acc_ref, &acc_meas, &measured), q)
                } else {
                    let q = estimate_disturbance(&cfg.measurement, &cfg.inner.in_p, &reading, &acc_meas);
                    let tau = piafc_torque(&cfg.inner, &mut self.state, &acc_ref, &acc_meas, &measured, dt, cfg.windup);
                    (tau, q)
                }
            }
        };
        self.last_command = tau;

        Ok(ControlOutput { tau, task_acc, acc_ref, acc_meas, q_est, integral: self.state.integral_acc })
    }
}
