use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mobman_core::disturbances::Preset;
use mobman_core::harness::csv_io::{write_compare_csv, write_run_csv, write_summary_csv, write_sweep_csv};
use mobman_core::{compare, run, summarize_window, sweep, ControlMode, ErrorSummary, SimConfig, SweepGrid};

/// Batch simulator for a differential-drive mobile manipulator under
/// RAC, RAC+AFC and RAC+PIAFC control.
#[derive(Parser)]
#[command(name = "mobman", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one controller and write the run log plus a summary.
    Run(Common),
    /// Rank a grid of inner-loop inertia gains by mean tip error.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Wheel IN values, comma separated. Defaults to 1.0..=2.8 by 0.1.
        #[arg(long, value_delimiter = ',')]
        wheel_in: Option<Vec<f64>>,
        /// Arm IN values, comma separated. Defaults to 0.01..=0.05 by 0.01.
        #[arg(long, value_delimiter = ',')]
        arm_in: Option<Vec<f64>>,
    },
    /// Run all three controllers on the same task and tabulate their errors.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RAC, RAC_AFC or RAC_PIAFC.
    #[arg(long)]
    mode: Option<ControlMode>,
    /// none, vibration or impact.
    #[arg(long)]
    disturbance: Option<Preset>,
    /// Simulated time in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Integration and control step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, default_mode: Option<ControlMode>) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::default(),
        };
        if let Some(mode) = self.mode.or(default_mode) {
            cfg.control.mode = mode;
        }
        if let Some(preset) = self.disturbance {
            cfg.disturbance.preset = preset;
        }
        if let Some(duration) = self.duration {
            cfg.sim.duration = duration;
        }
        if let Some(dt) = self.dt {
            cfg.sim.dt = dt;
            cfg.sim.control_dt = dt;
        }
        if let Some(seed) = self.seed {
            cfg.sim.seed = seed;
        }
        if cfg.sim.settle_time >= cfg.sim.duration {
            eprintln!("note: settle time {} s is not shorter than the run; summarizing the whole run", cfg.sim.settle_time);
            cfg.sim.settle_time = 0.0;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out(&self, cfg: &SimConfig, fallback: &str) -> PathBuf {
        self.out.clone().or_else(|| cfg.sim.output.clone()).unwrap_or_else(|| PathBuf::from(fallback))
    }
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn print_summary(label: &str, s: &ErrorSummary) {
    println!(
        "{label:<10} tip mean {:.4e} m  peak {:.4e} m  rms {:.4e} m  body mean {:.4e} m  ({:.1}-{:.1} s)",
        s.tip.mean, s.tip.peak, s.tip.rms, s.body.mean, s.window_start, s.window_end
    );
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.config(None)?;
            let out = common.out(&cfg, "run.csv");
            let result = run(&cfg)?;
            let summary = summarize_window(&result, cfg.sim.settle_time, f64::INFINITY)?;
            write_run_csv(&result, &out)?;
            let side = summary_path(&out);
            write_summary_csv(&summary, &side)?;
            print_summary(cfg.control.mode.name(), &summary);
            println!("wrote {} and {}", out.display(), side.display());
        }
        Command::Sweep { common, wheel_in, arm_in } => {
            let cfg = common.config(Some(ControlMode::RacAfc))?;
            let standard = SweepGrid::standard();
            let grid = SweepGrid { wheel_in: wheel_in.unwrap_or(standard.wheel_in), arm_in: arm_in.unwrap_or(standard.arm_in) };
            let out = common.out(&cfg, "sweep.csv");
            let points = sweep(&cfg, &grid)?;
            write_sweep_csv(&points, &out)?;
            for (rank, p) in points.iter().take(5).enumerate() {
                match &p.outcome {
                    Ok(s) => println!("{:>3}  wheel IN {:.3}  arm IN {:.4}  tip mean {:.4e} m", rank + 1, p.wheel_in, p.arm_in, s.tip.mean),
                    Err(e) => println!("{:>3}  wheel IN {:.3}  arm IN {:.4}  failed: {e}", rank + 1, p.wheel_in, p.arm_in),
                }
            }
            let failed = points.iter().filter(|p| p.outcome.is_err()).count();
            println!("{} points, {failed} failed; wrote {}", points.len(), out.display());
        }
        Command::Compare(common) => {
            let cfg = common.config(None)?;
            let out = common.out(&cfg, "compare.csv");
            let runs = compare(&cfg)?;
            write_compare_csv(&runs, &out)?;
            for r in &runs {
                print_summary(r.mode.name(), &r.summary);
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()).context("mobman failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
