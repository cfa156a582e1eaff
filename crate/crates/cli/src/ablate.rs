use std::path::{Path, PathBuf};

use halfphys_core::kinematics::MotionSequence;
use halfphys_core::scenario::{write_trajectory, ModeName, ScenarioFile};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::at;
use crate::run::{load, simulate, Overrides};
use crate::CliError;

/// Rise of the target object (m) above its start that counts as lifted.
pub const LIFT_THRESHOLD: f64 = 0.1;

/// Caps the sweep worker pool.
pub const THREADS_ENV: &str = "HALFPHYS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Parameter {
    ObjectMass,
    ObjectFriction,
    PjscLambda,
    /// Playback speed factor; scales the motion's frame rate.
    MotionSpeed,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::ObjectMass => "object_mass",
            Parameter::ObjectFriction => "object_friction",
            Parameter::PjscLambda => "pjsc_lambda",
            Parameter::MotionSpeed => "motion_speed",
        }
    }

    fn check(self, v: f64) -> Result<(), String> {
        let ok = match self {
            Parameter::ObjectMass | Parameter::MotionSpeed => v > 0.0,
            Parameter::ObjectFriction | Parameter::PjscLambda => v >= 0.0,
        };
        if ok && v.is_finite() {
            Ok(())
        } else {
            Err(format!("{} value {v} out of range", self.name()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: Parameter,
    pub values: Vec<f64>,
    /// Object whose mass or friction is swept and whose motion is reported.
    /// Defaults to the scene's only object.
    pub target: Option<String>,
}

impl SweepSpec {
    /// Values sorted ascending after range and duplicate checks.
    fn sorted_values(&self) -> Result<Vec<f64>, CliError> {
        if self.values.is_empty() {
            return Err(CliError::Config("sweep needs at least one value".into()));
        }
        let mut v = self.values.clone();
        for &x in &v {
            self.parameter.check(x).map_err(CliError::Config)?;
        }
        v.sort_by(f64::total_cmp);
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("sweep values must be distinct".into()));
        }
        Ok(v)
    }

    fn target_index(&self, s: &ScenarioFile) -> Result<Option<usize>, CliError> {
        let needs = matches!(self.parameter, Parameter::ObjectMass | Parameter::ObjectFriction);
        match &self.target {
            Some(name) => s
                .scene
                .object_index(name)
                .map(Some)
                .ok_or_else(|| CliError::Config(format!("no object named `{name}`"))),
            None if s.scene.objects.len() == 1 => Ok(Some(0)),
            None if needs => Err(CliError::Config(format!(
                "{} needs --target (scene has {} objects)",
                self.parameter.name(),
                s.scene.objects.len()
            ))),
            None => Ok(None),
        }
    }
}

/// Copy of `base` with the swept parameter set to `value`.
pub fn apply(base: &ScenarioFile, parameter: Parameter, target: Option<usize>, value: f64) -> Result<ScenarioFile, CliError> {
    let mut s = base.clone();
    match parameter {
        Parameter::ObjectMass => s.scene.objects[target.expect("checked")].mass = value,
        Parameter::ObjectFriction => s.scene.objects[target.expect("checked")].friction = value,
        Parameter::PjscLambda => s.lambda = value,
        Parameter::MotionSpeed => {
            s.sequence = MotionSequence::new(base.sequence.fps() * value, base.sequence.frames().to_vec())?;
        }
    }
    Ok(s)
}

/// One CSV row. Empty cells mean "not applicable" or "run failed".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub value: f64,
    /// Distance between the target object's first and last positions, m.
    pub displacement: Option<f64>,
    /// mm
    pub mpjpe_g: Option<f64>,
    /// %
    pub pene_rate: Option<f64>,
    pub lifted: Option<bool>,
    pub error: String,
}

/// Trajectory file name for one sweep value.
pub fn trajectory_name(parameter: Parameter, value: f64) -> String {
    format!("{}_{value}.jsonl", parameter.name())
}

fn run_one(s: &ScenarioFile, target: Option<usize>, traj_path: &Path) -> Result<Row, CliError> {
    let out = simulate(s)?;
    write_trajectory(&out.trajectory, traj_path).map_err(at(traj_path))?;
    let (displacement, lifted) = match target {
        Some(k) => {
            let first = out.trajectory.records[0].objects[k].pose.position;
            let last = out.trajectory.records.last().expect("non-empty").objects[k].pose.position;
            (Some((last - first).norm()), Some(last.z - first.z > LIFT_THRESHOLD))
        }
        None => (None, None),
    };
    Ok(Row {
        value: 0.0,
        displacement,
        mpjpe_g: Some(out.report.mpjpe_g),
        pene_rate: Some(out.report.pene_rate),
        lifted,
        error: String::new(),
    })
}

pub fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

#[derive(Debug, Clone)]
pub struct AblateArgs {
    pub scenario: PathBuf,
    pub overrides: Overrides,
    pub sweep: SweepSpec,
    /// Receives one trajectory per value and `ablate.csv`.
    pub out_dir: PathBuf,
}

/// Runs the sweep, writes the table and returns the rows in value order.
/// Failed runs are recorded in the `error` column; the sweep carries on.
pub fn cmd_ablate(args: &AblateArgs) -> Result<Vec<Row>, CliError> {
    let base = load(&args.scenario, &args.overrides)?;
    let values = args.sweep.sorted_values()?;
    let target = args.sweep.target_index(&base)?;
    if args.sweep.parameter == Parameter::PjscLambda && base.mode_name != ModeName::Hp {
        return Err(CliError::Config("pjsc_lambda sweeps need hp mode".into()));
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io { path: args.out_dir.display().to_string(), source: e.into() })?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let parameter = args.sweep.parameter;
    let rows: Vec<Row> = pool.install(|| {
        values
            .par_iter()
            .map(|&value| {
                let path = args.out_dir.join(trajectory_name(parameter, value));
                let result = apply(&base, parameter, target, value).and_then(|s| run_one(&s, target, &path));
                match result {
                    Ok(row) => Row { value, ..row },
                    Err(e) => Row {
                        value,
                        displacement: None,
                        mpjpe_g: None,
                        pene_rate: None,
                        lifted: None,
                        error: e.to_string(),
                    },
                }
            })
            .collect()
    });

    let csv_path = args.out_dir.join("ablate.csv");
    let io = |e: csv::Error| CliError::Io { path: csv_path.display().to_string(), source: std::io::Error::from(e).into() };
    let mut w = csv::Writer::from_path(&csv_path).map_err(io)?;
    for r in &rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io { path: csv_path.display().to_string(), source: e.into() })?;
    Ok(rows)
}
