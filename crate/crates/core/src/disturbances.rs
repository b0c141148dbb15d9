//! Deterministic disturbance torques: sinusoidal vibration and rectangular
//! impact pulses, per actuator channel.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ActuatorVector;

/// Actuator channel, in the fixed actuator order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    WheelL,
    WheelR,
    Joint1,
    Joint2,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::WheelL, Channel::WheelR, Channel::Joint1, Channel::Joint2];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibrationSpec {
    pub channel: Channel,
    /// Hz.
    pub frequency: f64,
    /// N·m.
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl VibrationSpec {
    pub fn value_at(&self, t: f64) -> f64 {
        self.amplitude * (TAU * self.frequency * t + self.phase).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactSpec {
    pub channel: Channel,
    pub start: f64,
    pub duration: f64,
    pub magnitude: f64,
}

impl ImpactSpec {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if t >= self.start && t < self.end() {
            self.magnitude
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    None,
    Vibration,
    Impact,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Preset::None),
            "vibration" => Ok(Preset::Vibration),
            "impact" => Ok(Preset::Impact),
            other => Err(Error::Config(format!("unknown disturbance preset '{other}'"))),
        }
    }
}

/// Knobs for the preset profiles whose exact values are not fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PresetOptions {
    pub wheel_frequency: f64,
    pub wheel_amplitude: f64,
    /// Phase of the right wheel relative to the left one.
    pub wheel_phase_offset: f64,
    /// 2.9 Hz by default; 3.2 Hz is the alternative reading.
    pub joint_frequency: f64,
    pub joint_amplitude: f64,
    pub impact_magnitude: f64,
    pub impact_duration: f64,
    /// Pulse start times for joint1, joint2, wheelL, wheelR, in that order.
    pub impact_starts: [f64; 4],
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            wheel_frequency: 2.2,
            wheel_amplitude: 2.0,
            wheel_phase_offset: PI,
            joint_frequency: 2.9,
            joint_amplitude: 0.3,
            impact_magnitude: 5.0,
            impact_duration: 0.05,
            impact_starts: [5.0, 8.0, 11.0, 14.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DisturbanceSchedule {
    pub preset: Preset,
    pub vibrations: Vec<VibrationSpec>,
    pub impacts: Vec<ImpactSpec>,
}

impl DisturbanceSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn preset(kind: Preset, opts: &PresetOptions) -> Self {
        match kind {
            Preset::None => Self::none(),
            Preset::Vibration => {
                let wheel = |channel, phase| VibrationSpec {
                    channel,
                    frequency: opts.wheel_frequency,
                    amplitude: opts.wheel_amplitude,
                    phase,
                };
                let joint = |channel| VibrationSpec {
                    channel,
                    frequency: opts.joint_frequency,
                    amplitude: opts.joint_amplitude,
                    phase: 0.0,
                };
                Self {
                    preset: kind,
                    vibrations: vec![
                        wheel(Channel::WheelL, 0.0),
                        wheel(Channel::WheelR, opts.wheel_phase_offset),
                        joint(Channel::Joint1),
                        joint(Channel::Joint2),
                    ],
                    impacts: Vec::new(),
                }
            }
            Preset::Impact => {
                let order = [Channel::Joint1, Channel::Joint2, Channel::WheelL, Channel::WheelR];
                let impacts = order
                    .iter()
                    .zip(opts.impact_starts)
                    .map(|(&channel, start)| ImpactSpec {
                        channel,
                        start,
                        duration: opts.impact_duration,
                        magnitude: opts.impact_magnitude,
                    })
                    .collect();
                Self { preset: kind, vibrations: Vec::new(), impacts }
            }
        }
    }

    /// The vibration or impact profile with default options.
    pub fn default_preset(kind: Preset) -> Self {
        Self::preset(kind, &PresetOptions::default())
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.vibrations {
            if !(v.frequency > 0.0) || !(v.amplitude >= 0.0) || !v.phase.is_finite() {
                return Err(Error::InvalidParam(format!("invalid vibration spec {v:?}")));
            }
        }
        for i in &self.impacts {
            if !(i.duration > 0.0) || !(i.start >= 0.0) || !i.magnitude.is_finite() {
                return Err(Error::InvalidParam(format!("invalid impact spec {i:?}")));
            }
        }
        Ok(())
    }

    /// Concatenate two schedules.
    pub fn merged(mut self, other: &Self) -> Self {
        self.vibrations.extend_from_slice(&other.vibrations);
        self.impacts.extend_from_slice(&other.impacts);
        self
    }

    pub fn sample(&self, t: f64) -> ActuatorVector {
        let mut out = ActuatorVector::ZERO;
        for v in &self.vibrations {
            out[v.channel.index()] += v.value_at(t);
        }
        for i in &self.impacts {
            out[i.channel.index()] += i.value_at(t);
        }
        out
    }
}
