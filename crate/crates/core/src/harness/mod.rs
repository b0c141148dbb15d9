//! Closed-loop runs, error metrics, gain sweeps and CSV artifacts.

pub mod config;
pub mod csv_io;
pub mod run;
pub mod summary;
pub mod sweep;

pub use config::{DisturbanceSection, PlantSection, SimConfig, SimSection, TaskSection};
pub use csv_io::{read_run_csv, write_compare_csv, write_run_csv, write_summary_csv, write_sweep_csv, RUN_COLUMNS};
pub use run::{compare, initial_state, run, ModeRun, RunRecord, RunResult};
pub use summary::{summarize, summarize_window, ErrorStats, ErrorSummary};
pub use sweep::{sweep, SweepGrid, SweepPoint};
