//! Kinematic motion sequences and their conversion into enforced velocities.

mod synth;

pub use synth::{synth_motion, SynthParams, SYNTH_KINDS};

use serde::{Deserialize, Serialize};

use crate::body::JointSpaceState;
use crate::math::{angdiff, Pose, Quat, Vec3};
use crate::Error;

/// Largest accepted deviation from unit norm for quaternions read from files.
pub const UNIT_TOLERANCE: f64 = 1e-3;

/// Per-frame kinematic targets at a fixed frame rate.
///
/// Quaternions are normalized and sign-continuous: the first frame has
/// non-negative `w`, and every later quaternion has a non-negative dot product
/// with the same quaternion in the previous frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    fps: f64,
    joint_count: usize,
    frames: Vec<JointSpaceState>,
}

impl MotionSequence {
    pub fn new(fps: f64, frames: Vec<JointSpaceState>) -> Result<Self, Error> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::Motion(format!("fps must be positive, got {fps}")));
        }
        if frames.len() < 2 {
            return Err(Error::Motion(format!("need at least 2 frames, got {}", frames.len())));
        }
        let joint_count = frames[0].joints.len();
        let mut frames = frames;
        for (t, f) in frames.iter_mut().enumerate() {
            if f.joints.len() != joint_count {
                return Err(Error::schema(
                    format!("frames[{t}].joints"),
                    format!("expected {joint_count} joints, got {}", f.joints.len()),
                ));
            }
            if !f.root.position.is_finite() {
                return Err(Error::schema(format!("frames[{t}].root_pos"), "non-finite value"));
            }
            f.root.orientation = checked_unit(f.root.orientation, || format!("frames[{t}].root_quat"))?;
            for (j, q) in f.joints.iter_mut().enumerate() {
                *q = checked_unit(*q, || format!("frames[{t}].joints[{j}]"))?;
            }
        }
        canonicalize(&mut frames);
        Ok(Self { fps, joint_count, frames })
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Frame interval `1 / fps`, seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.fps
    }

    pub fn joint_count(&self) -> usize {
        self.joint_count
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[JointSpaceState] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> Result<&JointSpaceState, Error> {
        self.frames.get(t).ok_or(Error::FrameOutOfRange { frame: t, frames: self.frames.len() })
    }

    /// Same poses with every root position shifted by `offset`.
    pub fn translated(&self, offset: Vec3) -> Self {
        let mut out = self.clone();
        for f in &mut out.frames {
            f.root.position += offset;
        }
        out
    }

    pub fn to_file(&self) -> MotionFile {
        MotionFile {
            fps: self.fps,
            joint_count: self.joint_count,
            frames: self
                .frames
                .iter()
                .map(|f| MotionFrame {
                    root_pos: f.root.position,
                    root_quat: f.root.orientation,
                    joints: f.joints.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(&self.to_file()).expect("motion serialization cannot fail")
    }
}

fn checked_unit(q: Quat, path: impl Fn() -> String) -> Result<Quat, Error> {
    let n = q.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::schema(path(), format!("quaternion norm {n} is not within {UNIT_TOLERANCE} of 1")));
    }
    Ok(q.normalize())
}

fn canonicalize(frames: &mut [JointSpaceState]) {
    if let Some(first) = frames.first_mut() {
        first.root.orientation = first.root.orientation.canonical();
        for q in &mut first.joints {
            *q = q.canonical();
        }
    }
    for t in 1..frames.len() {
        let (prev, rest) = frames.split_at_mut(t);
        let (prev, cur) = (&prev[t - 1], &mut rest[0]);
        cur.root.orientation = cur.root.orientation.aligned_with(prev.root.orientation);
        for (q, p) in cur.joints.iter_mut().zip(&prev.joints) {
            *q = q.aligned_with(*p);
        }
    }
}

/// Motion file layout. Z-up, metres, quaternions `[w, x, y, z]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionFile {
    pub fps: f64,
    pub joint_count: usize,
    pub frames: Vec<MotionFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionFrame {
    pub root_pos: Vec3,
    pub root_quat: Quat,
    pub joints: Vec<Quat>,
}

/// Parses, validates and canonicalizes a motion JSON document.
pub fn parse_motion(bytes: &[u8]) -> Result<MotionSequence, Error> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let file: MotionFile =
        serde_path_to_error::deserialize(de).map_err(|e| Error::schema(e.path().to_string(), e.inner().to_string()))?;
    for (t, f) in file.frames.iter().enumerate() {
        if f.joints.len() != file.joint_count {
            return Err(Error::schema(
                format!("frames[{t}].joints"),
                format!("expected joint_count = {} rotations, got {}", file.joint_count, f.joints.len()),
            ));
        }
    }
    let frames = file
        .frames
        .into_iter()
        .map(|f| JointSpaceState { root: Pose::new(f.root_pos, f.root_quat), joints: f.joints })
        .collect();
    MotionSequence::new(file.fps, frames)
}

/// Velocities enforced on the articulation for one frame interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameVelocities {
    pub root_linear: Vec3,
    /// World frame.
    pub root_angular: Vec3,
    /// Per joint, relative to the parent link and expressed in its frame.
    pub joint_omegas: Vec<Vec3>,
}

impl FrameVelocities {
    pub fn zero(joint_count: usize) -> Self {
        Self { root_linear: Vec3::ZERO, root_angular: Vec3::ZERO, joint_omegas: vec![Vec3::ZERO; joint_count] }
    }
}

/// Opt-in variations of the velocity rule. The defaults reproduce the plain
/// rule and are what every acceptance run uses.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VelocityOptions {
    /// Drive the root toward its frame target from the actual position,
    /// which also corrects positional drift after contacts.
    pub root_from_actual: bool,
    /// Clamp on the magnitude of every angular velocity, rad/s.
    pub max_angular_speed: Option<f64>,
}

/// Velocities carrying `current` to the frame-`t` targets over one frame.
///
/// Rotations (root and joints) go from the current state to the target, so
/// they self-correct after a disturbance. The root's linear velocity is the
/// difference between consecutive target positions.
pub fn frame_velocities(seq: &MotionSequence, t: usize, current: &JointSpaceState) -> Result<FrameVelocities, Error> {
    frame_velocities_with(seq, t, current, &VelocityOptions::default())
}

pub fn frame_velocities_with(
    seq: &MotionSequence,
    t: usize,
    current: &JointSpaceState,
    opts: &VelocityOptions,
) -> Result<FrameVelocities, Error> {
    if t == 0 || t >= seq.len() {
        return Err(Error::FrameOutOfRange { frame: t, frames: seq.len() });
    }
    if current.joints.len() != seq.joint_count() {
        return Err(Error::Mismatch(format!(
            "state has {} joints, motion has {}",
            current.joints.len(),
            seq.joint_count()
        )));
    }
    let dt = seq.dt();
    let target = &seq.frames[t];
    let root_linear = if opts.root_from_actual {
        (target.root.position - current.root.position) / dt
    } else {
        (target.root.position - seq.frames[t - 1].root.position) / dt
    };
    let clamp = |w: Vec3| match opts.max_angular_speed {
        Some(max) if w.norm() > max => w * (max / w.norm()),
        _ => w,
    };
    Ok(FrameVelocities {
        root_linear,
        root_angular: clamp(angdiff(target.root.orientation, current.root.orientation, dt)),
        joint_omegas: target.joints.iter().zip(&current.joints).map(|(q, c)| clamp(angdiff(*q, *c, dt))).collect(),
    })
}
