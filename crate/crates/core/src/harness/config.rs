use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controllers::ControllerConfig;
use crate::disturbances::{DisturbanceSchedule, ImpactSpec, Preset, PresetOptions, VibrationSpec};
use crate::error::{Error, Result};
use crate::plant::{Plant, RotorInertia};
use crate::robot_model::RobotParams;
use crate::trajectory::{CircularTaskSpec, TaskSpec, WaypointTask};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub rotor: RotorInertia,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceSection {
    pub preset: Preset,
    pub options: PresetOptions,
    /// Extra vibration sources on top of the preset.
    pub vibrations: Vec<VibrationSpec>,
    /// Extra impact pulses on top of the preset.
    pub impacts: Vec<ImpactSpec>,
}

impl DisturbanceSection {
    pub fn schedule(&self) -> DisturbanceSchedule {
        let extra = DisturbanceSchedule {
            preset: Preset::None,
            vibrations: self.vibrations.clone(),
            impacts: self.impacts.clone(),
        };
        DisturbanceSchedule::preset(self.preset, &self.options).merged(&extra)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    pub circle: CircularTaskSpec,
    /// CSV of `t, xF, yF, xE, yE` rows; replaces the circle when set.
    pub waypoints: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// Plant integration step, s.
    pub dt: f64,
    /// Controller period, s; an integer multiple of `dt`.
    pub control_dt: f64,
    pub duration: f64,
    pub seed: u64,
    /// Start of the window used for error summaries, s.
    pub settle_time: f64,
    pub output: Option<PathBuf>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { dt: 1e-3, control_dt: 1e-3, duration: 60.0, seed: 0, settle_time: 10.0, output: None }
    }
}

/// Complete description of one closed-loop run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub robot: RobotParams,
    pub plant: PlantSection,
    pub control: ControllerConfig,
    pub disturbance: DisturbanceSection,
    pub task: TaskSection,
    pub sim: SimSection,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // Waypoint files are relative to the config file.
        if let (Some(wp), Some(dir)) = (cfg.task.waypoints.as_mut(), path.parent()) {
            if wp.is_relative() {
                *wp = dir.join(&*wp);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn plant(&self) -> Plant {
        Plant::new(self.robot, self.plant.rotor)
    }

    /// Plant substeps per control tick.
    pub fn substeps(&self) -> Result<usize> {
        let ratio = self.sim.control_dt / self.sim.dt;
        let n = ratio.round();
        if !(n >= 1.0) || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::Config(format!(
                "sim.control_dt ({}) must be an integer multiple of sim.dt ({})",
                self.sim.control_dt, self.sim.dt
            )));
        }
        Ok(n as usize)
    }

    /// Number of control intervals in the run.
    pub fn ticks(&self) -> Result<usize> {
        let ratio = self.sim.duration / self.sim.control_dt;
        if !(ratio >= 1.0 - 1e-9) {
            return Err(Error::Config(format!(
                "sim.duration ({}) must be at least one control period ({})",
                self.sim.duration, self.sim.control_dt
            )));
        }
        Ok((ratio + 1e-9).floor() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        if !(self.plant.rotor.wheel >= 0.0) || !(self.plant.rotor.joint >= 0.0) {
            return Err(Error::InvalidParam("plant.rotor inertias must be >= 0".into()));
        }
        self.control.validate()?;
        self.disturbance.schedule().validate()?;
        if !(self.sim.dt > 0.0) || !(self.sim.control_dt > 0.0) || !self.sim.duration.is_finite() {
            return Err(Error::Config("sim.dt and sim.control_dt must be > 0".into()));
        }
        if self.sim.dt > self.sim.control_dt {
            return Err(Error::Config("sim.dt must not exceed sim.control_dt".into()));
        }
        if !(self.sim.settle_time >= 0.0) {
            return Err(Error::Config("sim.settle_time must be >= 0".into()));
        }
        self.substeps()?;
        self.ticks()?;
        if self.task.waypoints.is_none() {
            self.task.circle.validate()?;
        }
        Ok(())
    }

    /// The reference task, spanning exactly the simulated duration.
    pub fn task_spec(&self) -> Result<TaskSpec> {
        match &self.task.waypoints {
            Some(path) => {
                let wp = WaypointTask::from_csv(path)?;
                if wp.duration + 1e-9 < self.sim.duration {
                    return Err(Error::Config(format!(
                        "waypoints end at {} s but sim.duration is {} s",
                        wp.duration, self.sim.duration
                    )));
                }
                Ok(TaskSpec::Waypoints(Box::new(wp)))
            }
            None => {
                let mut circle = self.task.circle.clone();
                circle.duration = self.sim.duration;
                circle.validate()?;
                Ok(TaskSpec::Circular(circle))
            }
        }
    }
}
