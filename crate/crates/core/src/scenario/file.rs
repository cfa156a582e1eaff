//! Scenario documents: which body, which motion, which scene, which settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SceneSpec;
use crate::body::{build_humanoid, parse_body_spec, ArticulatedBodySpec};
use crate::dynamics::{ControlMode, SimConfig};
use crate::kinematics::{parse_motion, synth_motion, MotionSequence, SynthParams};
use crate::Error;

/// PD gains used when a `pd` scenario gives none.
pub const DEFAULT_KP: f64 = 200.0;
pub const DEFAULT_KD: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum BodySource {
    Template {
        template: String,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    Path {
        path: PathBuf,
    },
}

fn unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionSource {
    Path(PathBuf),
    Synth(SynthParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Hp,
    Pd,
    Teleport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdGains {
    #[serde(default = "default_kp")]
    pub kp: f64,
    #[serde(default = "default_kd")]
    pub kd: f64,
}

fn default_kp() -> f64 {
    DEFAULT_KP
}

fn default_kd() -> f64 {
    DEFAULT_KD
}

impl Default for PdGains {
    fn default() -> Self {
        Self { kp: DEFAULT_KP, kd: DEFAULT_KD }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
    #[serde(default)]
    pub metrics: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    body: BodySource,
    motion: MotionSource,
    #[serde(default)]
    scene: SceneSpec,
    #[serde(default)]
    config: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    mode: ModeName,
    #[serde(default)]
    pd: Option<PdGains>,
    #[serde(default)]
    outputs: Outputs,
}

/// A validated scenario with its body and motion resolved.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub body: BodySource,
    pub motion: MotionSource,
    pub scene: SceneSpec,
    pub config: SimConfig,
    /// PJSC gain, N·m/rad (`config.lambda`).
    pub lambda: f64,
    pub mode_name: ModeName,
    pub pd: PdGains,
    pub outputs: Outputs,
    pub spec: ArticulatedBodySpec,
    pub sequence: MotionSequence,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl ScenarioFile {
    pub fn mode(&self) -> ControlMode {
        match self.mode_name {
            ModeName::Hp => ControlMode::HalfPhysics { pjsc_lambda: self.lambda },
            ModeName::Pd => ControlMode::TorquePD { kp: self.pd.kp, kd: self.pd.kd },
            ModeName::Teleport => ControlMode::PositionTeleport,
        }
    }

    /// Resolves `p` against the scenario's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        resolve(&self.base_dir, p)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read(path: &Path, field: &str) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| Error::schema(field, format!("cannot read {}: {e}", path.display())))
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::Schema { path, message } => Error::schema(format!("{prefix}.{path}"), message),
        other => Error::schema(prefix, other.to_string()),
    }
}

/// Splits `lambda` out of the config section and parses the rest as
/// [`SimConfig`].
fn parse_config(mut map: serde_json::Map<String, serde_json::Value>) -> Result<(SimConfig, f64), Error> {
    let lambda = match map.remove("lambda") {
        None => 0.0,
        Some(v) => v.as_f64().ok_or_else(|| Error::schema("config.lambda", "expected a number"))?,
    };
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::schema("config.lambda", format!("must be non-negative, got {lambda}")));
    }
    let config: SimConfig = serde_path_to_error::deserialize(serde_json::Value::Object(map))
        .map_err(|e| Error::schema(format!("config.{}", e.path()), e.inner().to_string()))?;
    config.validate().map_err(|e| prefixed("config", e))?;
    Ok((config, lambda))
}

/// Parses and validates a scenario; relative paths resolve against `base_dir`.
pub fn load_scenario_in(bytes: &[u8], base_dir: &Path) -> Result<ScenarioFile, Error> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let raw: RawScenario =
        serde_path_to_error::deserialize(de).map_err(|e| Error::schema(e.path().to_string(), e.inner().to_string()))?;

    let (config, lambda) = parse_config(raw.config)?;
    let mut scene = raw.scene;
    scene.validate().map_err(|e| prefixed("scene", e))?;
    let pd = raw.pd.unwrap_or_default();
    if !(pd.kp >= 0.0 && pd.kd >= 0.0 && pd.kp.is_finite() && pd.kd.is_finite()) {
        return Err(Error::schema("pd", "gains must be non-negative"));
    }

    let spec = match &raw.body {
        BodySource::Template { template, scale } => build_humanoid(template, *scale).map_err(|e| prefixed("body", e))?,
        BodySource::Path { path } => {
            parse_body_spec(&read(&resolve(base_dir, path), "body.path")?).map_err(|e| prefixed("body", e))?
        }
    };
    let sequence = match &raw.motion {
        MotionSource::Synth(params) => synth_motion(&spec, params).map_err(|e| prefixed("motion.synth", e))?,
        MotionSource::Path(path) => {
            parse_motion(&read(&resolve(base_dir, path), "motion.path")?).map_err(|e| prefixed("motion", e))?
        }
    };
    if sequence.joint_count() != spec.joint_count() {
        return Err(Error::schema(
            "motion",
            format!("motion has {} joints, body has {}", sequence.joint_count(), spec.joint_count()),
        ));
    }

    Ok(ScenarioFile {
        body: raw.body,
        motion: raw.motion,
        scene,
        config,
        lambda,
        mode_name: raw.mode,
        pd,
        outputs: raw.outputs,
        spec,
        sequence,
        base_dir: base_dir.to_path_buf(),
    })
}

/// Parses a scenario whose relative paths resolve against the working directory.
pub fn load_scenario(bytes: &[u8]) -> Result<ScenarioFile, Error> {
    load_scenario_in(bytes, Path::new("."))
}

/// Reads a scenario file; relative paths resolve against its directory.
pub fn load_scenario_path(path: &Path) -> Result<ScenarioFile, Error> {
    let bytes = std::fs::read(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    load_scenario_in(&bytes, &base)
}
