use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use halfphys_core::dynamics::{self, Trajectory};
use halfphys_core::metrics::{evaluate, MetricsReport, DEFAULT_SAMPLES_PER_LINK};
use halfphys_core::scenario::{export_frame_obj, load_scenario_path, write_trajectory, ModeName, ScenarioFile};

use crate::error::at;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Hp,
    Pd,
    Teleport,
}

impl From<ModeArg> for ModeName {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Hp => ModeName::Hp,
            ModeArg::Pd => ModeName::Pd,
            ModeArg::Teleport => ModeName::Teleport,
        }
    }
}

/// Flags that take precedence over the scenario file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// PJSC gain, N·m/rad
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Substeps per frame
    #[arg(long)]
    pub substeps: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

impl Overrides {
    pub fn apply(&self, s: &mut ScenarioFile) -> Result<(), CliError> {
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(CliError::Config(format!("--lambda must be non-negative, got {l}")));
            }
            s.lambda = l;
        }
        if let Some(n) = self.substeps {
            if n == 0 {
                return Err(CliError::Config("--substeps must be at least 1".into()));
            }
            s.config.substeps = n;
        }
        if let Some(m) = self.mode {
            s.mode_name = m.into();
        }
        Ok(())
    }
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<ScenarioFile, CliError> {
    let mut s = load_scenario_path(path).map_err(|e| match e {
        halfphys_core::Error::Io(_) => CliError::Io { path: path.display().to_string(), source: e },
        other => CliError::Core(other),
    })?;
    overrides.apply(&mut s)?;
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub report: MetricsReport,
    /// Wall-clock time of the simulation alone.
    pub elapsed: Duration,
}

impl RunOutput {
    /// Simulated frames per wall-clock second (the initial frame is not stepped).
    pub fn fps(&self) -> f64 {
        self.trajectory.len().saturating_sub(1) as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }

    pub fn summary(&self) -> String {
        format!(
            "frames {} mpjpe_g {:.4} mm pene_rate {:.2}% fps {:.1}",
            self.report.frames,
            self.report.mpjpe_g,
            self.report.pene_rate,
            self.fps()
        )
    }
}

pub fn simulate(s: &ScenarioFile) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let trajectory = dynamics::run(&s.spec, &s.sequence, &s.scene, &s.config, s.mode())?;
    let elapsed = start.elapsed();
    let report = evaluate(&trajectory, &s.sequence, &s.spec, &s.scene, DEFAULT_SAMPLES_PER_LINK)?;
    Ok(RunOutput { trajectory, report, elapsed })
}

/// Metrics file contents. Shared by `run` and `metrics` so the two agree
/// byte for byte.
pub fn report_json(report: &MetricsReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("plain struct serializes");
    s.push('\n');
    s
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e.into() })
}

#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    pub scenario: PathBuf,
    pub overrides: Overrides,
    /// Replaces `outputs.trajectory`.
    pub trajectory: Option<PathBuf>,
    /// Replaces `outputs.metrics`.
    pub metrics: Option<PathBuf>,
    /// Wavefront OBJ snapshot of one frame.
    pub obj: Option<PathBuf>,
    /// Frame for `obj`; the last frame when absent.
    pub obj_frame: Option<usize>,
}

/// Simulates a scenario, writes the requested files and returns the summary line.
pub fn cmd_run(args: &RunArgs) -> Result<String, CliError> {
    let s = load(&args.scenario, &args.overrides)?;
    if let (Some(f), true) = (args.obj_frame, args.obj.is_some()) {
        if f >= s.sequence.len() {
            return Err(CliError::Config(format!("--obj-frame {f} out of range ({} frames)", s.sequence.len())));
        }
    }
    let out = simulate(&s)?;
    let traj_path = args.trajectory.clone().or_else(|| s.outputs.trajectory.as_deref().map(|p| s.resolve(p)));
    if let Some(p) = traj_path {
        write_trajectory(&out.trajectory, &p).map_err(at(&p))?;
    }
    let metrics_path = args.metrics.clone().or_else(|| s.outputs.metrics.as_deref().map(|p| s.resolve(p)));
    if let Some(p) = metrics_path {
        write_text(&p, &report_json(&out.report))?;
    }
    if let Some(p) = &args.obj {
        let frame = args.obj_frame.unwrap_or(out.trajectory.len() - 1);
        export_frame_obj(&out.trajectory.records[frame], &s.spec, &s.scene, p).map_err(at(p))?;
    }
    Ok(out.summary())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
    }

    #[test]
    fn overrides_replace_scenario_fields() {
        let ov = Overrides { lambda: Some(2.5), substeps: Some(3), mode: Some(ModeArg::Teleport) };
        let s = load(&scenario_dir().join("arm_pillar.json"), &ov).unwrap();
        assert_eq!(s.lambda, 2.5);
        assert_eq!(s.config.substeps, 3);
        assert_eq!(s.mode_name, ModeName::Teleport);
        let plain = load(&scenario_dir().join("arm_pillar.json"), &Overrides::default()).unwrap();
        assert_eq!(plain.lambda, 1.0);
        assert_eq!(plain.config.substeps, 8);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        let path = scenario_dir().join("free_space_walk.json");
        for ov in [
            Overrides { lambda: Some(-1.0), ..Default::default() },
            Overrides { lambda: Some(f64::NAN), ..Default::default() },
            Overrides { substeps: Some(0), ..Default::default() },
        ] {
            let e = load(&path, &ov).unwrap_err();
            assert_eq!(e.exit_code(), crate::EXIT_CONFIG, "{ov:?}");
        }
    }

    #[test]
    fn missing_scenario_is_io_error() {
        let e = load(Path::new("/nonexistent/scenario.json"), &Overrides::default()).unwrap_err();
        assert_eq!(e.exit_code(), crate::EXIT_IO);
        assert!(e.to_string().contains("/nonexistent/scenario.json"));
    }

    #[test]
    fn summary_line_fields() {
        let s = load(&scenario_dir().join("free_space_walk.json"), &Overrides::default()).unwrap();
        let mut s = s;
        s.sequence = halfphys_core::kinematics::MotionSequence::new(30.0, s.sequence.frames()[..5].to_vec()).unwrap();
        let out = simulate(&s).unwrap();
        let line = out.summary();
        assert!(line.starts_with("frames 5 mpjpe_g 0.0000 mm pene_rate 0.00% fps "), "{line}");
    }
}
