//! Fixed-order vectors shared by every module.
//!
//! Actuator channels are always ordered `(wheel_l, wheel_r, joint1, joint2)`;
//! task coordinates are always ordered `(x_f, y_f, phi, x_e, y_e)`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

pub const ACTUATOR_NAMES: [&str; 4] = ["wheelL", "wheelR", "joint1", "joint2"];
pub const TASK_NAMES: [&str; 5] = ["xF", "yF", "phi", "xE", "yE"];

/// One scalar per actuator. Whether it holds angles, rates, accelerations or
/// torques depends on context.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorVector {
    pub wheel_l: f64,
    pub wheel_r: f64,
    pub joint1: f64,
    pub joint2: f64,
}

impl ActuatorVector {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(wheel_l: f64, wheel_r: f64, joint1: f64, joint2: f64) -> Self {
        Self { wheel_l, wheel_r, joint1, joint2 }
    }

    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v, v)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.wheel_l, self.wheel_r, self.joint1, self.joint2]
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.wheel_l, self.wheel_r, self.joint1, self.joint2)
    }

    /// Element-wise product, used for diagonal gain matrices.
    pub fn hadamard(self, other: Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn map(self, f: impl FnMut(f64) -> f64) -> Self {
        Self::from_array(self.to_array().map(f))
    }

    pub fn zip_with(self, other: Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let a = self.to_array();
        let b = other.to_array();
        Self::new(f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2]), f(a[3], b[3]))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<usize> for ActuatorVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.wheel_l,
            1 => &self.wheel_r,
            2 => &self.joint1,
            3 => &self.joint2,
            _ => panic!("actuator index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for ActuatorVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.wheel_l,
            1 => &mut self.wheel_r,
            2 => &mut self.joint1,
            3 => &mut self.joint2,
            _ => panic!("actuator index {i} out of range"),
        }
    }
}

impl Add for ActuatorVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip_with(o, |a, b| a + b)
    }
}

impl Sub for ActuatorVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip_with(o, |a, b| a - b)
    }
}

impl Neg for ActuatorVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl Mul<f64> for ActuatorVector {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.map(|a| a * k)
    }
}

/// The five task coordinates: platform point F, heading, arm tip E.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TaskVector {
    pub x_f: f64,
    pub y_f: f64,
    pub phi: f64,
    pub x_e: f64,
    pub y_e: f64,
}

impl TaskVector {
    pub const ZERO: Self = Self { x_f: 0.0, y_f: 0.0, phi: 0.0, x_e: 0.0, y_e: 0.0 };

    pub fn from_array(a: [f64; 5]) -> Self {
        Self { x_f: a[0], y_f: a[1], phi: a[2], x_e: a[3], y_e: a[4] }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.x_f, self.y_f, self.phi, self.x_e, self.y_e]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

impl Sub for TaskVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] - b[i]))
    }
}
