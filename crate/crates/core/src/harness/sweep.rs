use rayon::prelude::*;

use crate::controllers::ControlMode;
use crate::error::{Error, Result};

use super::config::SimConfig;
use super::run::run;
use super::summary::{summarize_window, ErrorSummary};

/// Inner-loop inertia grid. Each point sets the wheel and joint entries of
/// the AFC `IN` and the PIAFC `IN_P` gains.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub wheel_in: Vec<f64>,
    pub arm_in: Vec<f64>,
}

impl SweepGrid {
    /// Wheel inertia 1.0..=2.8 by 0.1 and arm inertia 0.01..=0.05 by 0.01.
    pub fn standard() -> Self {
        Self { wheel_in: inclusive_range(1.0, 2.8, 0.1), arm_in: inclusive_range(0.01, 0.05, 0.01) }
    }

    pub fn single(wheel_in: f64, arm_in: f64) -> Self {
        Self { wheel_in: vec![wheel_in], arm_in: vec![arm_in] }
    }

    /// Grid points, wheel-major.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.wheel_in.iter().flat_map(|&w| self.arm_in.iter().map(move |&a| (w, a))).collect()
    }
}

/// `start, start + step, ...` up to `stop`, computed by index so the
/// endpoints are exact to rounding.
pub fn inclusive_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).map(|v| (v * 1e12).round() / 1e12).collect()
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// Position in `SweepGrid::points`.
    pub index: usize,
    pub wheel_in: f64,
    pub arm_in: f64,
    pub outcome: std::result::Result<ErrorSummary, String>,
}

impl SweepPoint {
    pub fn tip_mean(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|s| s.tip.mean)
    }
}

/// The base configuration with one grid point applied.
pub fn apply_point(base: &SimConfig, wheel_in: f64, arm_in: f64) -> SimConfig {
    let mut cfg = base.clone();
    for gains in [&mut cfg.control.inner.in_afc, &mut cfg.control.inner.in_p] {
        gains.wheel_l = wheel_in;
        gains.wheel_r = wheel_in;
        gains.joint1 = arm_in;
        gains.joint2 = arm_in;
    }
    cfg
}

/// Run every grid point and rank by mean tip error over the settle window.
/// Failed points are kept, after all successful ones.
pub fn sweep(base: &SimConfig, grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::InvalidParam("sweep grid is empty".into()));
    }
    if base.control.mode == ControlMode::Rac {
        return Err(Error::InvalidParam("sweeping inner-loop inertia needs an AFC mode".into()));
    }
    base.validate()?;

    let mut results: Vec<SweepPoint> = points
        .par_iter()
        .enumerate()
        .map(|(index, &(wheel_in, arm_in))| {
            let cfg = apply_point(base, wheel_in, arm_in);
            let outcome = run(&cfg)
                .and_then(|res| summarize_window(&res, cfg.sim.settle_time, f64::INFINITY))
                .map_err(|e| e.to_string());
            SweepPoint { index, wheel_in, arm_in, outcome }
        })
        .collect();

    results.sort_by(|a, b| match (a.tip_mean(), b.tip_mean()) {
        (Some(x), Some(y)) => x.total_cmp(&y).then(a.index.cmp(&b.index)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
    });
    Ok(results)
}
