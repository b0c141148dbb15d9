//! Time-parameterized references for the five task coordinates.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::TaskVector;

/// Position, velocity and acceleration of every task coordinate at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaskReference {
    pub t: f64,
    pub pos: TaskVector,
    pub vel: TaskVector,
    pub acc: TaskVector,
}

/// Platform point F on a counter-clockwise circle, tip on a curve to the
/// right of the platform (radially outward).
///
/// The tip offset from F is `offset + modulation_amplitude * sin(2 pi t / modulation_period)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircularTaskSpec {
    pub radius: f64,
    pub speed: f64,
    /// Heading of the path tangent at `t = 0`.
    pub initial_heading: f64,
    /// Reference position of F at `t = 0`.
    pub start_f: [f64; 2],
    pub offset: f64,
    pub modulation_amplitude: f64,
    pub modulation_period: f64,
    pub duration: f64,
    /// Actual tip position at `t = 0`; `None` starts on the reference.
    pub initial_tip: Option<[f64; 2]>,
}

impl Default for CircularTaskSpec {
    fn default() -> Self {
        standard_task()
    }
}

/// Start of the tip curve for the reference task.
pub const TIP_CURVE_START: [f64; 2] = [10.41, 0.35];
/// Actual tip position at `t = 0` for the reference task.
pub const DEFAULT_INITIAL_TIP: [f64; 2] = [10.55, 0.35];

/// The 10 m radius, 0.2 m/s circular task. F is placed so that the tip curve
/// starts at (10.41, 0.35) with the tip offset perpendicular to the initial
/// heading.
pub fn standard_task() -> CircularTaskSpec {
    let heading = PI / 2.4;
    let offset = 0.35;
    let outward = [heading.sin(), -heading.cos()];
    CircularTaskSpec {
        radius: 10.0,
        speed: 0.2,
        initial_heading: heading,
        start_f: [
            TIP_CURVE_START[0] - offset * outward[0],
            TIP_CURVE_START[1] - offset * outward[1],
        ],
        offset,
        modulation_amplitude: 0.05,
        modulation_period: 10.0,
        duration: 60.0,
        initial_tip: Some(DEFAULT_INITIAL_TIP),
    }
}

impl CircularTaskSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidParam(format!("task.radius must be > 0, got {}", self.radius)));
        }
        if !(self.speed >= 0.0) {
            return Err(Error::InvalidParam(format!("task.speed must be >= 0, got {}", self.speed)));
        }
        if !(self.modulation_period > 0.0) {
            return Err(Error::InvalidParam("task.modulation_period must be > 0".into()));
        }
        if !(self.duration > 0.0) {
            return Err(Error::InvalidParam("task.duration must be > 0".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> [f64; 2] {
        let (s, c) = self.initial_heading.sin_cos();
        [self.start_f[0] - self.radius * s, self.start_f[1] + self.radius * c]
    }

    /// Time for F to complete one lap.
    pub fn period(&self) -> f64 {
        TAU * self.radius / self.speed
    }

    fn evaluate(&self, t: f64) -> TaskReference {
        let rate = self.speed / self.radius;
        let heading = self.initial_heading + rate * t;
        let (s, c) = heading.sin_cos();
        let outward = [s, -c];
        let tangent = [c, s];
        let center = self.center();

        let f_pos = [center[0] + self.radius * outward[0], center[1] + self.radius * outward[1]];
        let f_vel = [self.speed * tangent[0], self.speed * tangent[1]];
        let f_acc = [-self.speed * rate * outward[0], -self.speed * rate * outward[1]];

        let k = TAU / self.modulation_period;
        let (ms, mc) = (k * t).sin_cos();
        let o = self.offset + self.modulation_amplitude * ms;
        let o_dot = self.modulation_amplitude * k * mc;
        let o_ddot = -self.modulation_amplitude * k * k * ms;

        // d(outward)/dt = rate * tangent, d(tangent)/dt = -rate * outward.
        let e = |i: usize| {
            let pos = f_pos[i] + o * outward[i];
            let vel = f_vel[i] + o_dot * outward[i] + o * rate * tangent[i];
            let acc = f_acc[i] + (o_ddot - o * rate * rate) * outward[i] + 2.0 * o_dot * rate * tangent[i];
            (pos, vel, acc)
        };
        let (ex, ey) = (e(0), e(1));

        TaskReference {
            t,
            pos: TaskVector { x_f: f_pos[0], y_f: f_pos[1], phi: heading, x_e: ex.0, y_e: ey.0 },
            vel: TaskVector { x_f: f_vel[0], y_f: f_vel[1], phi: rate, x_e: ex.1, y_e: ey.1 },
            acc: TaskVector { x_f: f_acc[0], y_f: f_acc[1], phi: 0.0, x_e: ex.2, y_e: ey.2 },
        }
    }
}

/// Natural cubic spline through `(t_i, y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidParam("spline needs at least two knots and matching values".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParam("spline knots must be strictly increasing".into()));
        }
        // Tridiagonal solve for the interior second derivatives (Thomas algorithm).
        let mut second = vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
            }
        }
        Ok(Self { knots: knots.to_vec(), values: values.to_vec(), second })
    }

    /// Value and first three derivatives at `t` (clamped to the knot range).
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let n = self.knots.len();
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let a = t1 - t;
        let b = t - t0;
        let value = m0 * a.powi(3) / (6.0 * h) + m1 * b.powi(3) / (6.0 * h) + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - (y0 / h - m0 * h / 6.0) + (y1 / h - m1 * h / 6.0);
        let d2 = m0 * a / h + m1 * b / h;
        let d3 = (m1 - m0) / h;
        [value, d1, d2, d3]
    }
}

/// Custom task from tabulated waypoints `(t, xF, yF, xE, yE)`; the heading
/// reference is the direction of travel of F.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointTask {
    splines: [CubicSpline; 4],
    /// Unwrapped heading at dense sample times, used to pick the 2 pi branch.
    heading_track: Vec<(f64, f64)>,
    pub duration: f64,
    pub initial_tip: Option<[f64; 2]>,
}

impl WaypointTask {
    pub fn new(rows: &[[f64; 5]]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidParam("waypoint task needs at least two rows".into()));
        }
        if rows[0][0] != 0.0 {
            return Err(Error::InvalidParam("waypoint times must start at 0".into()));
        }
        let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let column = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
        let splines = [
            CubicSpline::new(&times, &column(1))?,
            CubicSpline::new(&times, &column(2))?,
            CubicSpline::new(&times, &column(3))?,
            CubicSpline::new(&times, &column(4))?,
        ];
        let duration = *times.last().unwrap();

        let samples = 20 * rows.len();
        let mut heading_track = Vec::with_capacity(samples + 1);
        let mut prev: Option<f64> = None;
        for k in 0..=samples {
            let t = duration * k as f64 / samples as f64;
            let (vx, vy) = (splines[0].eval(t)[1], splines[1].eval(t)[1]);
            if vx.hypot(vy) < 1e-12 {
                return Err(Error::InvalidParam(format!("waypoint path stalls near t = {t:.3} s")));
            }
            let raw = vy.atan2(vx);
            let unwrapped = match prev {
                Some(p) => p + wrap_pi(raw - p),
                None => raw,
            };
            heading_track.push((t, unwrapped));
            prev = Some(unwrapped);
        }
        Ok(Self { splines, heading_track, duration, initial_tip: None })
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            if record.len() != 5 {
                return Err(Error::Config(format!("{}: expected 5 columns t,xF,yF,xE,yE", path.display())));
            }
            let mut row = [0.0; 5];
            for (j, field) in record.iter().enumerate() {
                row[j] = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{}: bad number '{field}'", path.display())))?;
            }
            rows.push(row);
        }
        Self::new(&rows)
    }

    fn heading_hint(&self, t: f64) -> f64 {
        let i = self.heading_track.partition_point(|&(ts, _)| ts <= t).clamp(1, self.heading_track.len() - 1);
        let (t0, h0) = self.heading_track[i - 1];
        let (t1, h1) = self.heading_track[i];
        h0 + (h1 - h0) * ((t - t0) / (t1 - t0)).clamp(0.0, 1.0)
    }

    fn evaluate(&self, t: f64) -> TaskReference {
        let [xf, yf, xe, ye] = [0, 1, 2, 3].map(|j| self.splines[j].eval(t));
        let (vx, vy) = (xf[1], yf[1]);
        let (ax, ay) = (xf[2], yf[2]);
        let (jx, jy) = (xf[3], yf[3]);
        let speed2 = vx * vx + vy * vy;
        let hint = self.heading_hint(t);
        let phi = hint + wrap_pi(vy.atan2(vx) - hint);
        let cross = vx * ay - vy * ax;
        let phi_dot = cross / speed2;
        let phi_ddot = (vx * jy - vy * jx) / speed2 - 2.0 * cross * (vx * ax + vy * ay) / (speed2 * speed2);
        TaskReference {
            t,
            pos: TaskVector { x_f: xf[0], y_f: yf[0], phi, x_e: xe[0], y_e: ye[0] },
            vel: TaskVector { x_f: vx, y_f: vy, phi: phi_dot, x_e: xe[1], y_e: ye[1] },
            acc: TaskVector { x_f: ax, y_f: ay, phi: phi_ddot, x_e: xe[2], y_e: ye[2] },
        }
    }
}

fn wrap_pi(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSpec {
    Circular(CircularTaskSpec),
    Waypoints(Box<WaypointTask>),
}

impl TaskSpec {
    pub fn duration(&self) -> f64 {
        match self {
            TaskSpec::Circular(c) => c.duration,
            TaskSpec::Waypoints(w) => w.duration,
        }
    }

    pub fn initial_tip(&self) -> Option<[f64; 2]> {
        match self {
            TaskSpec::Circular(c) => c.initial_tip,
            TaskSpec::Waypoints(w) => w.initial_tip,
        }
    }

    pub fn reference_at(&self, t: f64) -> Result<TaskReference> {
        reference_at(self, t)
    }
}

/// Reference sample at `t`, which must lie in `[0, duration]`.
pub fn reference_at(spec: &TaskSpec, t: f64) -> Result<TaskReference> {
    let duration = spec.duration();
    // Allow a rounding sliver at the end of a run.
    if !(t >= 0.0 && t <= duration * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange { t, duration });
    }
    Ok(match spec {
        TaskSpec::Circular(c) => c.evaluate(t),
        TaskSpec::Waypoints(w) => w.evaluate(t),
    })
}
