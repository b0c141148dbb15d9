//! Simulated plant: coupled platform + arm rigid-body dynamics reduced onto
//! the four actuator rates.
//!
//! The wheel no-slip constraint is eliminated through the velocity map
//! `q_dot = S(q) nu` with `q = (xF, yF, phi, theta1, theta2, thetaL, thetaR)`
//! and `nu = (wL, wR, w1, w2)`. Projecting Newton-Euler for every body through
//! its constrained Jacobian gives
//!
//! ```text
//! M_red(theta) nu_dot + h_red(theta, nu) = tau - tau_d
//! ```
//!
//! All Jacobians are written in the platform frame, which makes both terms
//! independent of the platform pose.

use nalgebra::{Matrix2, Matrix2x4, RowVector4, SVector, Vector2, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robot_model::{
    platform_forward_velocity, rotation_matrix, ArmConfig, PlatformPose, RobotParams,
};
use crate::types::ActuatorVector;

/// Any state component beyond this magnitude aborts the run.
pub const BLOWUP_LIMIT: f64 = 1e9;

/// Drive-side inertia reflected onto each actuator axis (kg·m²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotorInertia {
    pub wheel: f64,
    pub joint: f64,
}

impl Default for RotorInertia {
    fn default() -> Self {
        Self { wheel: 1.4, joint: 0.12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeneralizedState {
    pub pose: PlatformPose,
    pub arm: ArmConfig,
    /// Actuator rates `(wL, wR, w1, w2)`, rad/s.
    pub nu: ActuatorVector,
    /// `(thetaL, thetaR)`, rad.
    pub wheel_angles: [f64; 2],
}

impl GeneralizedState {
    fn pack(&self) -> SVector<f64, 11> {
        SVector::from_column_slice(&[
            self.pose.x_f,
            self.pose.y_f,
            self.pose.phi,
            self.arm.theta1,
            self.arm.theta2,
            self.wheel_angles[0],
            self.wheel_angles[1],
            self.nu.wheel_l,
            self.nu.wheel_r,
            self.nu.joint1,
            self.nu.joint2,
        ])
    }

    fn unpack(x: &SVector<f64, 11>) -> Self {
        Self {
            pose: PlatformPose { x_f: x[0], y_f: x[1], phi: x[2] },
            arm: ArmConfig { theta1: x[3], theta2: x[4] },
            wheel_angles: [x[5], x[6]],
            nu: ActuatorVector::new(x[7], x[8], x[9], x[10]),
        }
    }
}

/// Applied motor torques and disturbance torques. The plant sees `tau - tau_d`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantInputs {
    pub tau: ActuatorVector,
    pub tau_d: ActuatorVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDynamics {
    /// `S^T M S`, symmetric positive definite.
    pub mass: nalgebra::Matrix4<f64>,
    /// Coriolis and centripetal generalized forces.
    pub bias: Vector4<f64>,
}

impl ReducedDynamics {
    pub fn mass_diagonal(&self) -> ActuatorVector {
        ActuatorVector::from_vector(&self.mass.diagonal())
    }
}

fn perp(v: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

/// Constrained Jacobian and velocity-product acceleration of a point fixed in
/// the arm, given its platform-frame position relative to G.
struct PointTerms {
    jac: Matrix2x4<f64>,
    bias: Vector2<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct Plant {
    pub robot: RobotParams,
    pub rotor: RotorInertia,
}

impl Plant {
    pub fn new(robot: RobotParams, rotor: RotorInertia) -> Self {
        Self { robot, rotor }
    }

    fn forward_row(&self) -> RowVector4<f64> {
        let h = self.robot.r / 2.0;
        RowVector4::new(h, h, 0.0, 0.0)
    }

    fn heading_row(&self) -> RowVector4<f64> {
        let k = self.robot.heading_row();
        RowVector4::new(k.x, k.y, 0.0, 0.0)
    }

    /// `pos`: platform-frame position relative to G; `dpos`: its 2x2 joint
    /// Jacobian; `curv`: `d/dt(dpos) * theta_dot`.
    fn point_terms(&self, pos: Vector2<f64>, dpos: Matrix2<f64>, curv: Vector2<f64>, nu: &Vector4<f64>) -> PointTerms {
        let fwd = self.forward_row();
        let yaw = self.heading_row();
        let sp = perp(pos);
        let mut jac = Matrix2x4::zeros();
        for i in 0..4 {
            jac[(0, i)] = fwd[i] + yaw[i] * sp.x;
            jac[(1, i)] = yaw[i] * sp.y;
        }
        let mut joints = jac.fixed_view_mut::<2, 2>(0, 2);
        joints += dpos;

        let w = (yaw * nu)[0];
        let theta_dot = Vector2::new(nu[2], nu[3]);
        let vel = jac * nu;
        let bias = perp(dpos * theta_dot) * w + curv + perp(vel) * w;
        PointTerms { jac, bias }
    }

    pub fn reduced_dynamics(&self, state: &GeneralizedState) -> ReducedDynamics {
        let p = &self.robot;
        let nu = state.nu.to_vector();
        let (t1, t2) = (state.arm.theta1, state.arm.theta2);
        let (s1, c1) = t1.sin_cos();
        let (s12, c12) = (t1 + t2).sin_cos();
        let (w1, w12) = (nu[2], nu[2] + nu[3]);

        // Platform body, centre of mass at G.
        let platform = self.point_terms(Vector2::zeros(), Matrix2::zeros(), Vector2::zeros(), &nu);

        let link1 = self.point_terms(
            Vector2::new(p.d + p.l11 * c1, p.l11 * s1),
            Matrix2::new(-p.l11 * s1, 0.0, p.l11 * c1, 0.0),
            -p.l11 * w1 * w1 * Vector2::new(c1, s1),
            &nu,
        );

        let link2 = self.point_terms(
            Vector2::new(p.d + p.l1 * c1 + p.l22 * c12, p.l1 * s1 + p.l22 * s12),
            Matrix2::new(-p.l1 * s1 - p.l22 * s12, -p.l22 * s12, p.l1 * c1 + p.l22 * c12, p.l22 * c12),
            -p.l1 * w1 * w1 * Vector2::new(c1, s1) - p.l22 * w12 * w12 * Vector2::new(c12, s12),
            &nu,
        );

        let yaw = self.heading_row();
        let omega1 = yaw + RowVector4::new(0.0, 0.0, 1.0, 0.0);
        let omega2 = yaw + RowVector4::new(0.0, 0.0, 1.0, 1.0);

        let mut mass = p.m0 * platform.jac.transpose() * platform.jac
            + p.m1 * link1.jac.transpose() * link1.jac
            + p.m2 * link2.jac.transpose() * link2.jac
            + p.i0 * yaw.transpose() * yaw
            + p.i1 * omega1.transpose() * omega1
            + p.i2 * omega2.transpose() * omega2;
        mass[(0, 0)] += self.rotor.wheel;
        mass[(1, 1)] += self.rotor.wheel;
        mass[(2, 2)] += self.rotor.joint;
        mass[(3, 3)] += self.rotor.joint;
        // Symmetrize away rounding so downstream checks see an exactly symmetric matrix.
        let mass = (mass + mass.transpose()) * 0.5;

        let bias = p.m0 * platform.jac.transpose() * platform.bias
            + p.m1 * link1.jac.transpose() * link1.bias
            + p.m2 * link2.jac.transpose() * link2.bias;

        ReducedDynamics { mass, bias }
    }

    /// Kinetic energy summed body by body from world-frame centre-of-mass
    /// velocities.
    pub fn kinetic_energy(&self, state: &GeneralizedState) -> f64 {
        let p = &self.robot;
        let phi = state.pose.phi;
        let nu = &state.nu;
        let rates = platform_forward_velocity(p, phi, Vector2::new(nu.wheel_l, nu.wheel_r));
        let vel_f = Vector2::new(rates.x, rates.y);
        let phi_dot = rates.z;
        let rot = rotation_matrix(phi);
        let (t1, t2) = (state.arm.theta1, state.arm.theta2);

        let vel_g = vel_f - phi_dot * rot * Vector2::new(0.0, p.d);
        let a1 = phi_dot + nu.joint1;
        let a2 = a1 + nu.joint2;
        let u1 = Vector2::new(t1.cos(), t1.sin());
        let u12 = Vector2::new((t1 + t2).cos(), (t1 + t2).sin());
        let vel_c1 = vel_f + a1 * rot * perp(p.l11 * u1);
        let vel_c2 = vel_f + a1 * rot * perp(p.l1 * u1) + a2 * rot * perp(p.l22 * u12);

        let translational = p.m0 * vel_g.norm_squared() + p.m1 * vel_c1.norm_squared() + p.m2 * vel_c2.norm_squared();
        let rotational = p.i0 * phi_dot * phi_dot + p.i1 * a1 * a1 + p.i2 * a2 * a2;
        let rotor = self.rotor.wheel * (nu.wheel_l.powi(2) + nu.wheel_r.powi(2))
            + self.rotor.joint * (nu.joint1.powi(2) + nu.joint2.powi(2));
        0.5 * (translational + rotational + rotor)
    }

    /// Actuator accelerations for the given inputs.
    pub fn acceleration(&self, state: &GeneralizedState, inputs: &PlantInputs) -> Vector4<f64> {
        let dynamics = self.reduced_dynamics(state);
        let rhs = (inputs.tau - inputs.tau_d).to_vector() - dynamics.bias;
        match dynamics.mass.cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => dynamics.mass.lu().solve(&rhs).unwrap_or_else(|| Vector4::repeat(f64::NAN)),
        }
    }

    fn derivative(&self, x: &SVector<f64, 11>, inputs: &PlantInputs) -> SVector<f64, 11> {
        let state = GeneralizedState::unpack(x);
        let platform = platform_forward_velocity(&self.robot, x[2], Vector2::new(x[7], x[8]));
        let acc = self.acceleration(&state, inputs);
        SVector::from_column_slice(&[
            platform.x, platform.y, platform.z, x[9], x[10], x[7], x[8], acc[0], acc[1], acc[2], acc[3],
        ])
    }

    /// One classical RK4 step with inputs held constant over `dt`.
    pub fn step(&self, state: &GeneralizedState, inputs: &PlantInputs, dt: f64) -> Result<GeneralizedState> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParam(format!("dt must be > 0, got {dt}")));
        }
        let x = state.pack();
        let k1 = self.derivative(&x, inputs);
        let k2 = self.derivative(&(x + k1 * (dt / 2.0)), inputs);
        let k3 = self.derivative(&(x + k2 * (dt / 2.0)), inputs);
        let k4 = self.derivative(&(x + k3 * dt), inputs);
        let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if let Some((component, &value)) =
            next.iter().enumerate().find(|(_, v)| !v.is_finite() || v.abs() > BLOWUP_LIMIT)
        {
            return Err(Error::NumericalBlowup { component, value });
        }
        Ok(GeneralizedState::unpack(&next))
    }
}

/// Backward-difference acceleration estimate.
pub fn measured_acceleration(prev_nu: &ActuatorVector, nu: &ActuatorVector, dt: f64) -> ActuatorVector {
    (*nu - *prev_nu) * (1.0 / dt)
}

/// Acceleration sensor: backward difference plus optional white noise.
#[derive(Debug, Clone)]
pub struct Accelerometer {
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
}

impl Accelerometer {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        let noise = if sigma > 0.0 {
            Some(Normal::new(0.0, sigma).map_err(|e| Error::InvalidParam(format!("accelerometer sigma: {e}")))?)
        } else {
            None
        };
        Ok(Self { noise, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn ideal() -> Self {
        Self { noise: None, rng: ChaCha8Rng::seed_from_u64(0) }
    }

    pub fn measure(&mut self, prev_nu: &ActuatorVector, nu: &ActuatorVector, dt: f64) -> ActuatorVector {
        let clean = measured_acceleration(prev_nu, nu, dt);
        match self.noise {
            Some(dist) => {
                let rng = &mut self.rng;
                clean.map(|a| a + dist.sample(rng))
            }
            None => clean,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn plant() -> Plant {
        Plant::new(RobotParams::default(), RotorInertia::default())
    }

    fn moving_state() -> GeneralizedState {
        GeneralizedState {
            pose: PlatformPose { x_f: 0.3, y_f: -1.0, phi: 0.7 },
            arm: ArmConfig { theta1: 0.4, theta2: 1.3 },
            nu: ActuatorVector::new(1.5, 2.5, -0.8, 1.1),
            wheel_angles: [0.0, 0.0],
        }
    }

    #[test]
    fn energy_at_rest_is_zero() {
        let s = GeneralizedState::default();
        assert_eq!(plant().kinetic_energy(&s), 0.0);
    }

    #[test]
    fn straight_line_energy_closed_form() {
        let pl = plant();
        let p = pl.robot;
        let omega = 3.0;
        let s = GeneralizedState {
            pose: PlatformPose { x_f: 0.0, y_f: 0.0, phi: 0.4 },
            arm: ArmConfig { theta1: 0.5, theta2: 1.0 },
            nu: ActuatorVector::new(omega, omega, 0.0, 0.0),
            wheel_angles: [0.0, 0.0],
        };
        let expected = 0.5 * (p.m0 + p.m1 + p.m2) * (p.r * omega).powi(2) + pl.rotor.wheel * omega * omega;
        assert_abs_diff_eq!(pl.kinetic_energy(&s), expected, epsilon = 1e-12);
    }

    #[test]
    fn energy_is_frame_invariant() {
        let pl = plant();
        let s = moving_state();
        let mut rotated = s;
        rotated.pose.phi += 1.9;
        rotated.pose.x_f = 40.0;
        assert_abs_diff_eq!(pl.kinetic_energy(&s), pl.kinetic_energy(&rotated), epsilon = 1e-12);
    }

    #[test]
    fn quadratic_form_matches_energy() {
        let pl = plant();
        let s = moving_state();
        let nu = s.nu.to_vector();
        let dynamics = pl.reduced_dynamics(&s);
        let quad = 0.5 * (nu.transpose() * dynamics.mass * nu)[0];
        assert_abs_diff_eq!(quad, pl.kinetic_energy(&s), epsilon = 1e-12);
    }

    #[test]
    fn clamped_platform_reduces_to_two_link_arm() {
        // Textbook two-link inertia about a fixed base, plus reflected rotor inertia.
        let pl = plant();
        let p = pl.robot;
        let theta2: f64 = 0.9;
        let s = GeneralizedState { arm: ArmConfig { theta1: 0.3, theta2 }, ..Default::default() };
        let m = pl.reduced_dynamics(&s).mass;
        let c2 = theta2.cos();
        let m11 = p.i1 + p.m1 * p.l11.powi(2) + p.i2 + p.m2 * (p.l1.powi(2) + p.l22.powi(2) + 2.0 * p.l1 * p.l22 * c2);
        let m12 = p.i2 + p.m2 * (p.l22.powi(2) + p.l1 * p.l22 * c2);
        let m22 = p.i2 + p.m2 * p.l22.powi(2);
        assert_abs_diff_eq!(m[(2, 2)], m11 + pl.rotor.joint, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(2, 3)], m12, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(3, 3)], m22 + pl.rotor.joint, epsilon = 1e-12);
    }

    #[test]
    fn equilibrium_is_preserved() {
        let pl = plant();
        let s = GeneralizedState { arm: ArmConfig { theta1: 0.2, theta2: 1.0 }, ..Default::default() };
        let next = pl.step(&s, &PlantInputs::default(), 1e-3).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn step_rejects_bad_dt_and_reports_blowup() {
        let pl = plant();
        let s = moving_state();
        assert!(pl.step(&s, &PlantInputs::default(), 0.0).is_err());
        let huge = PlantInputs { tau: ActuatorVector::splat(1e15), tau_d: ActuatorVector::ZERO };
        assert!(matches!(pl.step(&s, &huge, 1.0), Err(Error::NumericalBlowup { .. })));
    }

    #[test]
    fn accelerometer_examples() {
        let nu = ActuatorVector::new(1.0, -2.0, 3.0, 0.5);
        assert_eq!(measured_acceleration(&nu, &nu, 1e-3), ActuatorVector::ZERO);

        let dt = 1e-3;
        let prev = ActuatorVector::splat(2.0 * 0.137);
        let next = ActuatorVector::splat(2.0 * (0.137 + dt));
        let a = measured_acceleration(&prev, &next, dt);
        for i in 0..4 {
            assert_abs_diff_eq!(a[i], 2.0, epsilon = 1e-9);
        }

        let sigma = 0.1;
        let mut sensor = Accelerometer::new(sigma, 7).unwrap();
        let n = 10_000;
        let mean = (0..n).map(|_| sensor.measure(&prev, &next, dt).wheel_l).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 3.0 * sigma / 100.0, "mean {mean}");
    }
}
