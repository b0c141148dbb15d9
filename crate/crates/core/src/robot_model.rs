//! Robot constants and the velocity-level kinematics of the differential-drive
//! platform with a two-link planar arm mounted at point F.
//!
//! Geometry: G is the platform centre of mass on the wheel axle, F lies a
//! distance `d` ahead of G along the heading, the wheels are `2b` apart.
//! The arm frame is attached at F and rotates with the platform, so joint 1
//! is measured relative to the heading.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ActuatorVector, TaskVector};

/// Default threshold on `|det J|` below which the arm is treated as singular.
pub const DEFAULT_EPS_SING: f64 = 1e-6;

/// Geometric and inertial constants of platform and arm (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotParams {
    /// Half the wheel separation.
    pub b: f64,
    /// Wheel radius.
    pub r: f64,
    /// Distance from G to F along the heading.
    pub d: f64,
    pub m0: f64,
    #[serde(rename = "I0")]
    pub i0: f64,
    pub l1: f64,
    pub l11: f64,
    pub l2: f64,
    pub l22: f64,
    pub m1: f64,
    pub m2: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            b: 0.25,
            r: 0.1,
            d: 0.1,
            m0: 20.0,
            i0: 1.0,
            l1: 0.3,
            l11: 0.15,
            l2: 0.25,
            l22: 0.125,
            m1: 1.0,
            m2: 0.8,
            i1: 0.02,
            i2: 0.015,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("b", self.b),
            ("r", self.r),
            ("d", self.d),
            ("m0", self.m0),
            ("I0", self.i0),
            ("l1", self.l1),
            ("l11", self.l11),
            ("l2", self.l2),
            ("l22", self.l22),
            ("m1", self.m1),
            ("m2", self.m2),
            ("I1", self.i1),
            ("I2", self.i2),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam(format!("robot.{name} must be > 0, got {v}")));
            }
        }
        if self.l11 > self.l1 {
            return Err(Error::InvalidParam(format!("robot.l11 ({}) exceeds l1 ({})", self.l11, self.l1)));
        }
        if self.l22 > self.l2 {
            return Err(Error::InvalidParam(format!("robot.l22 ({}) exceeds l2 ({})", self.l22, self.l2)));
        }
        Ok(())
    }

    /// Wheel-rate coefficients of the heading rate: `phi_dot = k . (wL, wR)`.
    pub(crate) fn heading_row(&self) -> Vector2<f64> {
        let k = self.r / (2.0 * self.b);
        Vector2::new(-k, k)
    }
}

/// Platform pose at point F. `phi` is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlatformPose {
    pub x_f: f64,
    pub y_f: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ArmConfig {
    pub theta1: f64,
    pub theta2: f64,
}

pub fn rotation_matrix(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Body-frame translational block of the platform map: `(v_x, v_y)_body = A (wL, wR)`.
pub fn platform_block(params: &RobotParams) -> Matrix2<f64> {
    let half_r = params.r / 2.0;
    let lat = params.d * params.r / (2.0 * params.b);
    Matrix2::new(half_r, half_r, -lat, lat)
}

/// World-frame velocity of F and heading rate from the wheel rates.
pub fn platform_forward_velocity(params: &RobotParams, phi: f64, wheel_rates: Vector2<f64>) -> Vector3<f64> {
    let (s, c) = phi.sin_cos();
    let half_r = params.r / 2.0;
    let lat = params.d * params.r / (2.0 * params.b);
    let k = params.r / (2.0 * params.b);
    let (wl, wr) = (wheel_rates.x, wheel_rates.y);
    Vector3::new(
        (half_r * c + lat * s) * wl + (half_r * c - lat * s) * wr,
        (half_r * s - lat * c) * wl + (half_r * s + lat * c) * wr,
        -k * wl + k * wr,
    )
}

/// Wheel accelerations that realize a commanded acceleration of F, with the
/// heading command superposed differentially on top.
///
/// Only the term linear in the wheel accelerations is inverted; velocity
/// product terms are the caller's concern.
pub fn platform_inverse_acceleration(
    params: &RobotParams,
    phi: f64,
    acc_f: Vector2<f64>,
    phi_acc: f64,
) -> Result<Vector2<f64>> {
    if params.d.abs() <= f64::EPSILON {
        return Err(Error::SingularMap { d: params.d });
    }
    let a_inv = platform_block(params).try_inverse().ok_or(Error::SingularMap { d: params.d })?;
    let translational = a_inv * rotation_matrix(phi).transpose() * acc_f;
    let delta = params.b / params.r * (phi_acc / 2.0);
    Ok(translational + Vector2::new(-delta, delta))
}

/// Arm-frame tip position relative to F.
pub fn arm_tip_local(params: &RobotParams, theta1: f64, theta2: f64) -> Vector2<f64> {
    let t12 = theta1 + theta2;
    Vector2::new(
        params.l1 * theta1.cos() + params.l2 * t12.cos(),
        params.l1 * theta1.sin() + params.l2 * t12.sin(),
    )
}

pub fn arm_jacobian(params: &RobotParams, theta1: f64, theta2: f64) -> Matrix2<f64> {
    let (s1, c1) = theta1.sin_cos();
    let (s12, c12) = (theta1 + theta2).sin_cos();
    let (l1, l2) = (params.l1, params.l2);
    Matrix2::new(
        -l1 * s1 - l2 * s12,
        -l2 * s12,
        l1 * c1 + l2 * c12,
        l2 * c12,
    )
}

/// Time derivative of the arm Jacobian along the joint rates.
pub fn arm_jacobian_dot(params: &RobotParams, theta1: f64, theta2: f64, rates: Vector2<f64>) -> Matrix2<f64> {
    let (s1, c1) = theta1.sin_cos();
    let (s12, c12) = (theta1 + theta2).sin_cos();
    let (l1, l2) = (params.l1, params.l2);
    let w1 = rates.x;
    let w12 = rates.x + rates.y;
    Matrix2::new(
        -l1 * c1 * w1 - l2 * c12 * w12,
        -l2 * c12 * w12,
        -l1 * s1 * w1 - l2 * s12 * w12,
        -l2 * s12 * w12,
    )
}

pub fn arm_tip_position(params: &RobotParams, pose: &PlatformPose, theta1: f64, theta2: f64) -> Vector2<f64> {
    Vector2::new(pose.x_f, pose.y_f) + rotation_matrix(pose.phi) * arm_tip_local(params, theta1, theta2)
}

/// Joint rates producing the arm-frame tip velocity `tip_vel`.
pub fn arm_inverse_velocity(
    params: &RobotParams,
    theta1: f64,
    theta2: f64,
    tip_vel: Vector2<f64>,
    eps_sing: f64,
) -> Result<Vector2<f64>> {
    let j = arm_jacobian(params, theta1, theta2);
    let det = j.determinant();
    if det.abs() < eps_sing {
        return Err(Error::NearSingular { det, eps: eps_sing, theta2 });
    }
    let inv = Matrix2::new(j[(1, 1)], -j[(0, 1)], -j[(1, 0)], j[(0, 0)]) / det;
    Ok(inv * tip_vel)
}

/// Joint angles placing the tip at an arm-frame point. `elbow_positive`
/// selects the branch with `theta2 > 0`.
pub fn arm_inverse_position(params: &RobotParams, target: Vector2<f64>, elbow_positive: bool) -> Result<ArmConfig> {
    let (l1, l2) = (params.l1, params.l2);
    let dist2 = target.norm_squared();
    let c2 = (dist2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if !(-1.0..=1.0).contains(&c2) {
        return Err(Error::InvalidParam(format!(
            "arm target ({:.4}, {:.4}) out of reach (|p| = {:.4}, reach {:.4})",
            target.x,
            target.y,
            dist2.sqrt(),
            l1 + l2
        )));
    }
    let s2 = (1.0 - c2 * c2).sqrt() * if elbow_positive { 1.0 } else { -1.0 };
    let theta2 = s2.atan2(c2);
    let theta1 = target.y.atan2(target.x) - (l2 * s2).atan2(l1 + l2 * c2);
    Ok(ArmConfig { theta1, theta2 })
}

/// Map from `(wL, wR, w1, w2)` rates to `(xE_dot, yE_dot, xF_dot, yF_dot)`.
///
/// The inner matrix uses the same `r/(2b)` heading coefficient as the
/// platform map so that the composition with the arm map is exact.
pub fn total_velocity_map(params: &RobotParams, phi: f64, theta1: f64, theta2: f64) -> Matrix4<f64> {
    let rot = rotation_matrix(phi);
    let j = arm_jacobian(params, theta1, theta2);
    let half_r = params.r / 2.0;
    let k = params.r / (2.0 * params.b);
    let d = params.d;

    let mut outer = Matrix4::zeros();
    outer.fixed_view_mut::<2, 2>(0, 0).copy_from(&rot);
    outer.fixed_view_mut::<2, 2>(2, 2).copy_from(&rot);

    #[rustfmt::skip]
    let inner = Matrix4::new(
        half_r - j[(0, 0)] * k,  half_r + j[(0, 0)] * k,  j[(0, 0)], j[(0, 1)],
        -(d + j[(1, 0)]) * k,    (d + j[(1, 0)]) * k,     j[(1, 0)], j[(1, 1)],
        half_r,                  half_r,                  0.0,       0.0,
        -d * k,                  d * k,                   0.0,       0.0,
    );
    outer * inner
}

/// Sideways-slip residual at the axle point G.
pub fn nonholonomic_residual(phi: f64, vel_g: Vector2<f64>) -> f64 {
    vel_g.x * phi.sin() - vel_g.y * phi.cos()
}

/// Sideways-slip residual expressed at point F.
pub fn residual_at_f(phi: f64, phi_dot: f64, vel_f: Vector2<f64>, d: f64) -> f64 {
    vel_f.x * phi.sin() - vel_f.y * phi.cos() + phi_dot * d
}

/// Task-space position of a configuration.
pub fn task_position(params: &RobotParams, pose: &PlatformPose, arm: &ArmConfig) -> TaskVector {
    let tip = arm_tip_position(params, pose, arm.theta1, arm.theta2);
    TaskVector { x_f: pose.x_f, y_f: pose.y_f, phi: pose.phi, x_e: tip.x, y_e: tip.y }
}

/// Task-space velocity from the actuator rates.
pub fn task_velocity(params: &RobotParams, pose: &PlatformPose, arm: &ArmConfig, rates: &ActuatorVector) -> TaskVector {
    let platform = platform_forward_velocity(params, pose.phi, Vector2::new(rates.wheel_l, rates.wheel_r));
    let j = arm_jacobian(params, arm.theta1, arm.theta2);
    let tip = Vector2::new(platform.x, platform.y)
        + rotation_matrix(pose.phi) * j * Vector2::new(rates.joint1 + platform.z, rates.joint2);
    TaskVector { x_f: platform.x, y_f: platform.y, phi: platform.z, x_e: tip.x, y_e: tip.y }
}
