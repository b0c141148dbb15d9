//! CSV artifacts. Floats carry 9 significant digits.

use std::fs::File;
use std::path::Path;

use crate::controllers::ControlMode;
use crate::error::{Error, Result};
use crate::types::{ActuatorVector, TaskVector};

use super::run::{ModeRun, RunRecord, RunResult};
use super::summary::ErrorSummary;
use super::sweep::SweepPoint;

/// Column order of a run log.
pub const RUN_COLUMNS: [&str; 27] = [
    "t",
    "ref_xF", "ref_yF", "ref_phi", "ref_xE", "ref_yE",
    "act_xF", "act_yF", "act_phi", "act_xE", "act_yE",
    "tau_wheelL", "tau_wheelR", "tau_joint1", "tau_joint2",
    "dist_wheelL", "dist_wheelR", "dist_joint1", "dist_joint2",
    "q_wheelL", "q_wheelR", "q_joint1", "q_joint2",
    "int_wheelL", "int_wheelR", "int_joint1", "int_joint2",
];

pub const SWEEP_COLUMNS: [&str; 8] =
    ["rank", "wheel_in", "arm_in", "tip_mean", "tip_peak", "tip_rms", "body_mean", "status"];

pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn record_row(r: &RunRecord) -> Vec<f64> {
    let mut row = Vec::with_capacity(RUN_COLUMNS.len());
    row.push(r.t);
    row.extend(r.reference.to_array());
    row.extend(r.actual.to_array());
    for v in [r.tau, r.tau_d, r.q_est, r.integral] {
        row.extend(v.to_array());
    }
    row
}

pub fn write_run_csv(result: &RunResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    w.write_record(RUN_COLUMNS).map_err(csv_err)?;
    for r in &result.records {
        w.write_record(record_row(r).into_iter().map(fmt_float)).map_err(csv_err)?;
    }
    finish(w, path)
}

/// Read a run log back. The mode is not stored in the file and must be supplied.
pub fn read_run_csv(path: &Path, mode: ControlMode) -> Result<RunResult> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if !header.iter().eq(RUN_COLUMNS.iter().copied()) {
        return Err(Error::Config(format!("{}: unexpected run log header", path.display())));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let v: Vec<f64> = row
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let act = |o: usize| ActuatorVector::new(v[o], v[o + 1], v[o + 2], v[o + 3]);
        let task = |o: usize| TaskVector::from_array([v[o], v[o + 1], v[o + 2], v[o + 3], v[o + 4]]);
        records.push(RunRecord {
            t: v[0],
            reference: task(1),
            actual: task(6),
            tau: act(11),
            tau_d: act(15),
            q_est: act(19),
            integral: act(23),
        });
    }
    let control_dt = match records.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => 0.0,
    };
    Ok(RunResult { mode, control_dt, records })
}

pub fn write_summary_csv(summary: &ErrorSummary, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    w.write_record(["key", "value"]).map_err(csv_err)?;
    for (k, v) in summary.key_values() {
        w.write_record([k, fmt_float(v)]).map_err(csv_err)?;
    }
    finish(w, path)
}

/// Joint summary of a mode comparison: keys are prefixed with the mode name.
pub fn write_compare_csv(runs: &[ModeRun], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    w.write_record(["key", "value"]).map_err(csv_err)?;
    for run in runs {
        for (k, v) in run.summary.key_values() {
            w.write_record([format!("{}.{k}", run.mode), fmt_float(v)]).map_err(csv_err)?;
        }
    }
    finish(w, path)
}

pub fn write_sweep_csv(points: &[SweepPoint], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    w.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
    for (rank, p) in points.iter().enumerate() {
        let mut row = vec![(rank + 1).to_string(), fmt_float(p.wheel_in), fmt_float(p.arm_in)];
        match &p.outcome {
            Ok(s) => {
                row.extend([s.tip.mean, s.tip.peak, s.tip.rms, s.body.mean].map(fmt_float));
                row.push("ok".into());
            }
            Err(msg) => {
                row.extend(std::iter::repeat_n(String::new(), 4));
                row.push(format!("error: {msg}"));
            }
        }
        w.write_record(row).map_err(csv_err)?;
    }
    finish(w, path)
}
