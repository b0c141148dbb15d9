use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::TASK_NAMES;

use super::run::{RunRecord, RunResult};

/// Mean absolute value, peak and RMS of one error series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub peak: f64,
    pub rms: f64,
}

impl ErrorStats {
    pub fn from_samples(samples: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut sum, mut sq, mut peak) = (0usize, 0.0, 0.0, 0.0f64);
        for s in samples {
            let a = s.abs();
            n += 1;
            sum += a;
            sq += a * a;
            peak = peak.max(a);
        }
        if n == 0 {
            return Self::default();
        }
        let n = n as f64;
        Self { mean: sum / n, peak, rms: (sq / n).sqrt() }
    }
}

/// Tracking-error metrics over a time window. Tip and body errors are
/// Euclidean distances to the reference at the same instant, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorSummary {
    pub window_start: f64,
    pub window_end: f64,
    pub samples: usize,
    /// Per task coordinate `(xF, yF, phi, xE, yE)`.
    pub coords: [ErrorStats; 5],
    pub tip: ErrorStats,
    pub body: ErrorStats,
}

impl ErrorSummary {
    /// `(key, value)` rows in a fixed order.
    pub fn key_values(&self) -> Vec<(String, f64)> {
        let mut rows = vec![
            ("window_start".to_string(), self.window_start),
            ("window_end".to_string(), self.window_end),
            ("samples".to_string(), self.samples as f64),
        ];
        let mut push = |name: &str, s: &ErrorStats| {
            rows.push((format!("{name}.mean"), s.mean));
            rows.push((format!("{name}.peak"), s.peak));
            rows.push((format!("{name}.rms"), s.rms));
        };
        push("tip", &self.tip);
        push("body", &self.body);
        for (name, s) in TASK_NAMES.iter().zip(&self.coords) {
            push(name, s);
        }
        rows
    }
}

pub fn tip_error(r: &RunRecord) -> f64 {
    (r.actual.x_e - r.reference.x_e).hypot(r.actual.y_e - r.reference.y_e)
}

pub fn body_error(r: &RunRecord) -> f64 {
    (r.actual.x_f - r.reference.x_f).hypot(r.actual.y_f - r.reference.y_f)
}

/// Metrics over the whole run.
pub fn summarize(result: &RunResult) -> Result<ErrorSummary> {
    summarize_window(result, f64::NEG_INFINITY, f64::INFINITY)
}

/// Metrics over the records with `start <= t <= end`.
pub fn summarize_window(result: &RunResult, start: f64, end: f64) -> Result<ErrorSummary> {
    let window: Vec<&RunRecord> = result.records.iter().filter(|r| r.t >= start && r.t <= end).collect();
    let (first, last) = match (window.first(), window.last()) {
        (Some(f), Some(l)) => (f.t, l.t),
        _ => return Err(Error::InvalidParam(format!("no samples in summary window [{start}, {end}]"))),
    };
    let coords = std::array::from_fn(|i| {
        ErrorStats::from_samples(window.iter().map(|r| r.actual.to_array()[i] - r.reference.to_array()[i]))
    });
    Ok(ErrorSummary {
        window_start: first,
        window_end: last,
        samples: window.len(),
        coords,
        tip: ErrorStats::from_samples(window.iter().map(|r| tip_error(r))),
        body: ErrorStats::from_samples(window.iter().map(|r| body_error(r))),
    })
}
