mod common;

use mobman_core::controllers::resolve_to_actuators;
use mobman_core::plant::GeneralizedState;
use mobman_core::robot_model::*;
use mobman_core::types::{ActuatorVector, TaskVector};
use nalgebra::{Vector2, Vector4, Vector5};
use proptest::prelude::*;

fn p() -> RobotParams {
    RobotParams::default()
}

fn arb_arm() -> impl Strategy<Value = ArmConfig> {
    (-3.0f64..3.0, 0.2f64..2.9, any::<bool>())
        .prop_map(|(theta1, m, neg)| ArmConfig { theta1, theta2: if neg { -m } else { m } })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn jacobian_matches_central_differences(arm in arb_arm()) {
        let h = 1e-6;
        let j = arm_jacobian(&p(), arm.theta1, arm.theta2);
        let c0 = (arm_tip_local(&p(), arm.theta1 + h, arm.theta2) - arm_tip_local(&p(), arm.theta1 - h, arm.theta2)) / (2.0 * h);
        let c1 = (arm_tip_local(&p(), arm.theta1, arm.theta2 + h) - arm_tip_local(&p(), arm.theta1, arm.theta2 - h)) / (2.0 * h);
        prop_assert!((j.column(0) - c0).abs().max() < 1e-6);
        prop_assert!((j.column(1) - c1).abs().max() < 1e-6);
    }

    #[test]
    fn jacobian_rate_matches_central_differences(arm in arb_arm(), w1 in -2.0f64..2.0, w2 in -2.0f64..2.0) {
        let h = 1e-6;
        let jd = arm_jacobian_dot(&p(), arm.theta1, arm.theta2, Vector2::new(w1, w2));
        let fd = (arm_jacobian(&p(), arm.theta1 + w1 * h, arm.theta2 + w2 * h)
            - arm_jacobian(&p(), arm.theta1 - w1 * h, arm.theta2 - w2 * h)) / (2.0 * h);
        prop_assert!((jd - fd).abs().max() < 1e-6);
    }

    #[test]
    fn platform_velocities_satisfy_no_slip(phi in -7.0f64..7.0, l in -10.0f64..10.0, r in -10.0f64..10.0) {
        let v = platform_forward_velocity(&p(), phi, Vector2::new(l, r));
        prop_assert!(residual_at_f(phi, v.z, Vector2::new(v.x, v.y), p().d).abs() < 1e-12);
    }

    #[test]
    fn inverse_kinematics_round_trip(arm in arb_arm()) {
        let tip = arm_tip_local(&p(), arm.theta1, arm.theta2);
        let back = arm_inverse_position(&p(), tip, arm.theta2 > 0.0).unwrap();
        prop_assert!((arm_tip_local(&p(), back.theta1, back.theta2) - tip).norm() < 1e-8);
        prop_assert!((back.theta2 - arm.theta2).abs() < 1e-8);
    }

    #[test]
    fn resolved_accelerations_produce_commanded_task_accelerations(seed in any::<u64>(), cmd in prop::array::uniform5(-2.0f64..2.0)) {
        let state = common::random_state(&mut common::rng(seed));
        let task = TaskVector::from_array(cmd);
        let acc = resolve_to_actuators(&p(), &state, &task, DEFAULT_EPS_SING).unwrap();
        let fd = task_acceleration_fd(&state, &acc);
        // The tip is resolved against the platform motion actually produced.
        for i in [3, 4] {
            prop_assert!((fd[i] - cmd[i]).abs() < 1e-4 * (1.0 + cmd[i].abs()), "coord {i}: {} vs {}", fd[i], cmd[i]);
        }

        // Without a heading command F is realized exactly as well.
        let flat = TaskVector { phi: 0.0, ..task };
        let acc = resolve_to_actuators(&p(), &state, &flat, DEFAULT_EPS_SING).unwrap();
        let fd = task_acceleration_fd(&state, &acc);
        for i in [0, 1, 3, 4] {
            prop_assert!((fd[i] - cmd[i]).abs() < 1e-4 * (1.0 + cmd[i].abs()), "coord {i}: {} vs {}", fd[i], cmd[i]);
        }
    }

    #[test]
    fn total_map_matches_composition(phi in -7.0f64..7.0, arm in arb_arm(), nu in prop::array::uniform4(-5.0f64..5.0)) {
        let m = total_velocity_map(&p(), phi, arm.theta1, arm.theta2);
        let got = m * Vector4::from(nu);
        let pose = PlatformPose { x_f: 0.0, y_f: 0.0, phi };
        let v = task_velocity(&p(), &pose, &arm, &ActuatorVector::from_array(nu));
        let want = Vector4::new(v.x_e, v.y_e, v.x_f, v.y_f);
        prop_assert!((got - want).abs().max() < 1e-10);
    }
}

/// Task accelerations under constant actuator accelerations, from a
/// five-point stencil over an RK4 integration of the kinematics.
fn task_acceleration_fd(state: &GeneralizedState, acc: &ActuatorVector) -> [f64; 5] {
    let rate = |x: &Vector5<f64>, t: f64| {
        let nu = state.nu + *acc * t;
        let v = platform_forward_velocity(&p(), x[2], Vector2::new(nu.wheel_l, nu.wheel_r));
        Vector5::new(v.x, v.y, v.z, nu.joint1, nu.joint2)
    };
    let at = |t: f64| {
        let mut x = Vector5::new(state.pose.x_f, state.pose.y_f, state.pose.phi, state.arm.theta1, state.arm.theta2);
        let n = 16;
        let dt = t / n as f64;
        for k in 0..n {
            let tau = k as f64 * dt;
            let k1 = rate(&x, tau);
            let k2 = rate(&(x + k1 * (dt / 2.0)), tau + dt / 2.0);
            let k3 = rate(&(x + k2 * (dt / 2.0)), tau + dt / 2.0);
            let k4 = rate(&(x + k3 * dt), tau + dt);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        let pose = PlatformPose { x_f: x[0], y_f: x[1], phi: x[2] };
        task_position(&p(), &pose, &ArmConfig { theta1: x[3], theta2: x[4] }).to_array()
    };
    let h = 1e-3;
    let (m2, m1, z, p1, p2) = (at(-2.0 * h), at(-h), at(0.0), at(h), at(2.0 * h));
    std::array::from_fn(|i| (-p2[i] + 16.0 * p1[i] - 30.0 * z[i] + 16.0 * m1[i] - m2[i]) / (12.0 * h * h))
}

#[test]
fn arm_singularity_is_reported() {
    let state = GeneralizedState { arm: ArmConfig { theta1: 0.3, theta2: 0.0 }, ..Default::default() };
    let err = resolve_to_actuators(&p(), &state, &TaskVector::ZERO, DEFAULT_EPS_SING).unwrap_err();
    assert!(matches!(err, mobman_core::Error::NearSingular { .. }));
}
