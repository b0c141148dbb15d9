//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use mobman_core::plant::{GeneralizedState, Plant, RotorInertia};
use mobman_core::robot_model::{ArmConfig, PlatformPose, RobotParams};
use mobman_core::types::ActuatorVector;
use nalgebra::{SVector, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Q = SVector<f64, 7>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Elbow angle kept clear of the straight-arm singularity.
pub fn random_arm(rng: &mut ChaCha8Rng) -> ArmConfig {
    let theta1 = rng.gen_range(-3.0..3.0);
    let mag = rng.gen_range(0.2..2.9);
    let theta2 = if rng.gen_bool(0.5) { mag } else { -mag };
    ArmConfig { theta1, theta2 }
}

pub fn random_state(rng: &mut ChaCha8Rng) -> GeneralizedState {
    GeneralizedState {
        pose: PlatformPose { x_f: rng.gen_range(-5.0..5.0), y_f: rng.gen_range(-5.0..5.0), phi: rng.gen_range(-3.2..3.2) },
        arm: random_arm(rng),
        nu: ActuatorVector::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ),
        wheel_angles: [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
    }
}

/// Unconstrained coordinates `(xF, yF, phi, theta1, theta2, thetaL, thetaR)`.
pub fn coords(s: &GeneralizedState) -> Q {
    Q::from_column_slice(&[
        s.pose.x_f,
        s.pose.y_f,
        s.pose.phi,
        s.arm.theta1,
        s.arm.theta2,
        s.wheel_angles[0],
        s.wheel_angles[1],
    ])
}

/// Rolling-without-slipping map from actuator rates to coordinate rates.
pub fn constraint_rates(p: &RobotParams, q: &Q, nu: &Vector4<f64>) -> Q {
    let v = p.r * (nu[0] + nu[1]) / 2.0;
    let w = p.r * (nu[1] - nu[0]) / (2.0 * p.b);
    let (s, c) = q[2].sin_cos();
    Q::from_column_slice(&[v * c - p.d * w * s, v * s + p.d * w * c, w, nu[2], nu[3], nu[0], nu[1]])
}

/// Kinetic energy for arbitrary coordinate rates, from body positions
/// differentiated by hand.
pub fn kinetic_energy(p: &RobotParams, rotor: &RotorInertia, q: &Q, qd: &Q) -> f64 {
    let (phi, t1, t2) = (q[2], q[3], q[4]);
    let (dx, dy, dphi, dt1, dt2, dl, dr) = (qd[0], qd[1], qd[2], qd[3], qd[4], qd[5], qd[6]);
    let a1 = phi + t1;
    let a2 = a1 + t2;
    let (w1, w2) = (dphi + dt1, dphi + dt1 + dt2);

    // G = F - d (cos phi, sin phi).
    let vg = (dx + p.d * phi.sin() * dphi, dy - p.d * phi.cos() * dphi);
    // C1 = F + l11 (cos a1, sin a1).
    let vc1 = (dx - p.l11 * a1.sin() * w1, dy + p.l11 * a1.cos() * w1);
    // C2 = F + l1 (cos a1, sin a1) + l22 (cos a2, sin a2).
    let vc2 = (
        dx - p.l1 * a1.sin() * w1 - p.l22 * a2.sin() * w2,
        dy + p.l1 * a1.cos() * w1 + p.l22 * a2.cos() * w2,
    );
    let sq = |v: (f64, f64)| v.0 * v.0 + v.1 * v.1;
    0.5 * (p.m0 * sq(vg) + p.m1 * sq(vc1) + p.m2 * sq(vc2))
        + 0.5 * (p.i0 * dphi * dphi + p.i1 * w1 * w1 + p.i2 * w2 * w2)
        + 0.5 * rotor.wheel * (dl * dl + dr * dr)
        + 0.5 * rotor.joint * (dt1 * dt1 + dt2 * dt2)
}

/// `dT/dqdot`. Central differences of a quadratic form are exact for any step.
fn momentum(p: &RobotParams, rotor: &RotorInertia, q: &Q, qd: &Q) -> Q {
    Q::from_fn(|i, _| {
        let mut up = *qd;
        let mut dn = *qd;
        up[i] += 1.0;
        dn[i] -= 1.0;
        (kinetic_energy(p, rotor, q, &up) - kinetic_energy(p, rotor, q, &dn)) / 2.0
    })
}

/// Coordinates after time `t` with actuator rates `nu + nu_dot * t`.
fn flow(p: &RobotParams, q0: &Q, nu: &Vector4<f64>, nu_dot: &Vector4<f64>, t: f64) -> Q {
    let steps = 8;
    let h = t / steps as f64;
    let f = |q: &Q, s: f64| constraint_rates(p, q, &(nu + nu_dot * s));
    let mut q = *q0;
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = f(&q, s);
        let k2 = f(&(q + k1 * (h / 2.0)), s + h / 2.0);
        let k3 = f(&(q + k2 * (h / 2.0)), s + h / 2.0);
        let k4 = f(&(q + k3 * h), s + h);
        q += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    q
}

/// Generalized actuator forces required for accelerations `nu_dot`, from
/// the constrained Euler-Lagrange equations evaluated numerically:
/// `S^T (d/dt dT/dqdot - dT/dq)`.
pub fn lagrangian_forces(plant: &Plant, state: &GeneralizedState, nu_dot: &Vector4<f64>) -> Vector4<f64> {
    let p = &plant.robot;
    let rotor = &plant.rotor;
    let q = coords(state);
    let nu = state.nu.to_vector();

    let h = 1e-4;
    let at = |t: f64| {
        let qt = flow(p, &q, &nu, nu_dot, t);
        let qd = constraint_rates(p, &qt, &(nu + nu_dot * t));
        momentum(p, rotor, &qt, &qd)
    };
    let dp_dt = (at(h) - at(-h)) / (2.0 * h);

    let qd = constraint_rates(p, &q, &nu);
    let e = 1e-6;
    let dt_dq = Q::from_fn(|i, _| {
        let mut up = q;
        let mut dn = q;
        up[i] += e;
        dn[i] -= e;
        (kinetic_energy(p, rotor, &up, &qd) - kinetic_energy(p, rotor, &dn, &qd)) / (2.0 * e)
    });

    let residual = dp_dt - dt_dq;
    // S^T: the columns of S are the rates produced by unit actuator rates.
    Vector4::from_fn(|j, _| {
        let mut unit = Vector4::zeros();
        unit[j] = 1.0;
        constraint_rates(p, &q, &unit).dot(&residual)
    })
}
