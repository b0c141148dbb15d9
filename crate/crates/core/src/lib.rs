//! Simulation of a differential-drive mobile manipulator under resolved
//! acceleration control with active force control inner loops.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controllers;
pub mod disturbances;
pub mod error;
pub mod harness;
pub mod plant;
pub mod robot_model;
pub mod trajectory;
pub mod types;

pub use controllers::{ControlMode, Controller, ControllerConfig, InnerLoopGains, RacGains};
pub use disturbances::{DisturbanceSchedule, Preset};
pub use error::{Error, Result};
pub use harness::{compare, run, summarize, summarize_window, sweep, ErrorSummary, RunResult, SimConfig, SweepGrid};
pub use plant::{GeneralizedState, Plant, RotorInertia};
pub use robot_model::{ArmConfig, PlatformPose, RobotParams};
pub use trajectory::{CircularTaskSpec, TaskReference, TaskSpec};
pub use types::{ActuatorVector, TaskVector};
