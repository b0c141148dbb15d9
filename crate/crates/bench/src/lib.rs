//! Shared fixtures for the benchmarks.

use mobman_core::{ActuatorVector, ArmConfig, GeneralizedState, PlatformPose};

/// A moving, non-degenerate state away from the arm singularity.
pub fn sample_state() -> GeneralizedState {
    GeneralizedState {
        pose: PlatformPose { x_f: 1.0, y_f: -0.5, phi: 0.7 },
        arm: ArmConfig { theta1: -0.4, theta2: 1.1 },
        nu: ActuatorVector::new(2.0, 2.5, 0.3, -0.2),
        wheel_angles: [0.0, 0.0],
    }
}
