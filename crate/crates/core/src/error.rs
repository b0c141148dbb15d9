use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The platform translational map lost rank (d = 0).
    #[error("platform velocity map is singular (d = {d})")]
    SingularMap { d: f64 },

    /// The arm Jacobian determinant fell below the singularity threshold.
    #[error("arm Jacobian near singular: |det J| = {det:.3e} < {eps:.3e} (theta2 = {theta2:.6})")]
    NearSingular { det: f64, eps: f64, theta2: f64 },

    #[error("numerical blow-up: state component {component} = {value:e}")]
    NumericalBlowup { component: usize, value: f64 },

    #[error("time {t} s outside reference range [0, {duration}] s")]
    OutOfRange { t: f64, duration: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid config: {0}")]
    Config(String),

    /// A closed-loop run failed at a given control tick.
    #[error("run aborted at tick {tick} (t = {t:.3} s): {source}")]
    AtTick {
        tick: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
