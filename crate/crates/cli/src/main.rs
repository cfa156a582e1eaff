use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use halfphys_cli::ablate::{cmd_ablate, AblateArgs, Parameter, SweepSpec};
use halfphys_cli::bench::cmd_bench;
use halfphys_cli::metrics::{cmd_metrics, MetricsArgs};
use halfphys_cli::run::{cmd_run, Overrides, RunArgs};
use halfphys_cli::CliError;

/// Half-physics human-scene interaction simulator.
///
/// Exit status: 0 success, 2 configuration error, 3 simulation abort,
/// 4 I/O error.
#[derive(Parser)]
#[command(name = "halfphys", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its trajectory and metrics
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Trajectory output (JSON lines); overrides outputs.trajectory
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Metrics output (JSON); overrides outputs.metrics
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Write a Wavefront OBJ snapshot of one frame
        #[arg(long)]
        obj: Option<PathBuf>,
        /// Frame for --obj (default: last)
        #[arg(long, requires = "obj")]
        obj_frame: Option<usize>,
    },
    /// Recompute the metrics of a stored trajectory
    Metrics {
        trajectory: PathBuf,
        /// Scenario providing the body, scene and reference motion
        #[arg(long)]
        scenario: PathBuf,
        /// Reference motion file replacing the scenario's motion
        #[arg(long)]
        motion: Option<PathBuf>,
        /// Also write the report to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one physical parameter and tabulate the outcomes
    Ablate {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: Parameter,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Object to modify and track (default: the scene's only object)
        #[arg(long)]
        target: Option<String>,
        /// Directory for per-value trajectories and ablate.csv
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Time repeated runs of a scenario
    Bench {
        scenario: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Run { scenario, overrides, trajectory, metrics, obj, obj_frame } => {
            cmd_run(&RunArgs { scenario, overrides, trajectory, metrics, obj, obj_frame })
        }
        Command::Metrics { trajectory, scenario, motion, out } => {
            cmd_metrics(&MetricsArgs { trajectory, scenario, motion, out }).map(|s| s.trim_end().to_string())
        }
        Command::Ablate { scenario, param, values, target, out_dir, overrides } => {
            let args = AblateArgs { scenario, overrides, sweep: SweepSpec { parameter: param, values, target }, out_dir };
            let rows = cmd_ablate(&args)?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            for r in rows.iter().filter(|r| !r.error.is_empty()) {
                eprintln!("halfphys: {} = {}: {}", param.name(), r.value, r.error);
            }
            if failed > 0 {
                return Err(CliError::SweepFailed { failed, total: rows.len() });
            }
            Ok(format!("{} runs, table at {}", rows.len(), args.out_dir.join("ablate.csv").display()))
        }
        Command::Bench { scenario, repeats, overrides } => cmd_bench(&scenario, &overrides, repeats).map(|r| r.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("halfphys: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
