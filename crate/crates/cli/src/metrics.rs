use std::path::PathBuf;

use halfphys_core::kinematics::parse_motion;
use halfphys_core::metrics::{evaluate, DEFAULT_SAMPLES_PER_LINK};
use halfphys_core::scenario::read_trajectory;

use crate::error::at;
use crate::run::{load, report_json, write_text, Overrides};
use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct MetricsArgs {
    pub trajectory: PathBuf,
    /// Supplies the body, the scene and (unless `motion` is set) the reference motion.
    pub scenario: PathBuf,
    /// Reference motion file replacing the scenario's motion.
    pub motion: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Re-scores a stored trajectory and returns the metrics JSON.
pub fn cmd_metrics(args: &MetricsArgs) -> Result<String, CliError> {
    let mut s = load(&args.scenario, &Overrides::default())?;
    if let Some(p) = &args.motion {
        let bytes = std::fs::read(p).map_err(|e| CliError::Io { path: p.display().to_string(), source: e.into() })?;
        s.sequence = parse_motion(&bytes)?;
    }
    let traj = read_trajectory(&args.trajectory).map_err(at(&args.trajectory))?;
    let report = evaluate(&traj, &s.sequence, &s.spec, &s.scene, DEFAULT_SAMPLES_PER_LINK)?;
    let json = report_json(&report);
    if let Some(p) = &args.out {
        write_text(p, &json)?;
    }
    Ok(json)
}
