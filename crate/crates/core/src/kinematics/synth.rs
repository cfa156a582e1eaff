//! Procedural motions for tests, fixtures and demos.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::body::{ArticulatedBodySpec, JointSpaceState};
use crate::math::{Pose, Quat, Vec3};
use crate::Error;

use super::MotionSequence;

pub const SYNTH_KINDS: [&str; 5] = ["static", "walk_forward", "sine_joints", "kick", "squat_sit"];

/// Parameters for [`synth_motion`]. Fields a kind does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub kind: String,
    pub fps: f64,
    /// Frame count; takes precedence over `duration`.
    pub frames: Option<usize>,
    /// Seconds; defaults depend on the kind.
    pub duration: Option<f64>,
    /// Root forward speed for `walk_forward`, m/s.
    pub speed: f64,
    /// Peak joint angle, rad.
    pub amplitude: f64,
    /// Oscillation frequency, Hz.
    pub frequency: f64,
    /// Root height; defaults to 1 cm above the standing height of the body.
    pub root_height: Option<f64>,
    /// Initial root x/y (z is ignored).
    pub start: Vec3,
    /// Pelvis drop of `squat_sit`, m.
    pub depth: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            kind: "static".into(),
            fps: 30.0,
            frames: None,
            duration: None,
            speed: 0.3,
            amplitude: 0.4,
            frequency: 0.5,
            root_height: None,
            start: Vec3::ZERO,
            depth: 0.35,
        }
    }
}

impl SynthParams {
    pub fn new(kind: &str) -> Self {
        Self { kind: kind.into(), ..Self::default() }
    }

    pub fn with_frames(mut self, frames: usize) -> Self {
        self.frames = Some(frames);
        self
    }
}

fn default_duration(kind: &str) -> f64 {
    match kind {
        "static" => 1.0,
        "kick" => 2.5,
        "squat_sit" => 3.0,
        _ => 10.0,
    }
}

/// Generates a deterministic motion for `spec`.
///
/// Limb motions look links up by the humanoid template names (`l_thigh`,
/// `r_shin`, ...). `walk_forward` on a body without legs only translates the
/// root; `kick` and `squat_sit` require legs.
pub fn synth_motion(spec: &ArticulatedBodySpec, params: &SynthParams) -> Result<MotionSequence, Error> {
    let kind = params.kind.as_str();
    if !SYNTH_KINDS.contains(&kind) {
        return Err(Error::UnknownMotion(params.kind.clone()));
    }
    if !(params.fps > 0.0 && params.fps.is_finite()) {
        return Err(Error::Motion(format!("fps must be positive, got {}", params.fps)));
    }
    let n = match params.frames {
        Some(n) => n,
        None => (params.duration.unwrap_or_else(|| default_duration(kind)) * params.fps).round() as usize,
    };
    let height = params.root_height.unwrap_or_else(|| spec.standing_height() + 0.01);
    let base = Vec3::new(params.start.x, params.start.y, height);
    let joints = spec.joint_count();
    let gen = Generator { spec, p: params, base };
    let frames: Result<Vec<_>, Error> = (0..n)
        .map(|i| {
            let t = i as f64 / params.fps;
            match kind {
                "static" => Ok(JointSpaceState::with_root(Pose::from_position(base), joints)),
                "walk_forward" => Ok(gen.walk(t)),
                "sine_joints" => Ok(gen.sine(t)),
                "kick" => gen.kick(t),
                _ => gen.squat(t),
            }
        })
        .collect();
    MotionSequence::new(params.fps, frames?)
}

struct Generator<'a> {
    spec: &'a ArticulatedBodySpec,
    p: &'a SynthParams,
    base: Vec3,
}

fn pitch(angle: f64) -> Quat {
    Quat::from_axis_angle(Vec3::Y, angle)
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Piecewise smoothstep through `(time, value)` keys; constant outside.
fn keyframes(keys: &[(f64, f64)], t: f64) -> f64 {
    if t <= keys[0].0 {
        return keys[0].1;
    }
    for w in keys.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if t <= t1 {
            return v0 + (v1 - v0) * smoothstep((t - t0) / (t1 - t0));
        }
    }
    keys[keys.len() - 1].1
}

impl Generator<'_> {
    fn rest(&self, root: Vec3) -> JointSpaceState {
        JointSpaceState::with_root(Pose::from_position(root), self.spec.joint_count())
    }

    fn set(&self, js: &mut JointSpaceState, link: &str, q: Quat) {
        if let Some(i) = self.spec.link_index(link) {
            if i > 0 {
                js.joints[i - 1] = q;
            }
        }
    }

    fn require(&self, links: &[&str]) -> Result<(), Error> {
        match links.iter().find(|l| self.spec.link_index(l).is_none()) {
            Some(l) => Err(Error::Motion(format!("motion `{}` needs a link named {l}", self.p.kind))),
            None => Ok(()),
        }
    }

    /// Hips swing in antiphase, knees flex during swing, ankles keep the feet
    /// level and the arms counter-swing.
    fn walk(&self, t: f64) -> JointSpaceState {
        let a = self.p.amplitude;
        let phase = 2.0 * PI * self.p.frequency * t;
        let mut js = self.rest(self.base + Vec3::new(self.p.speed * t, 0.0, 0.0));
        for (side, sign) in [("l", 1.0), ("r", -1.0)] {
            let hip = -sign * a * phase.sin();
            let knee = 1.5 * a * (sign * phase.cos()).max(0.0);
            self.set(&mut js, &format!("{side}_thigh"), pitch(hip));
            self.set(&mut js, &format!("{side}_shin"), pitch(knee));
            self.set(&mut js, &format!("{side}_foot"), pitch(-(hip + knee)));
            self.set(&mut js, &format!("{side}_upper_arm"), pitch(0.5 * sign * a * phase.sin()));
        }
        js
    }

    /// Every joint oscillates about its own fixed axis with a per-joint phase.
    fn sine(&self, t: f64) -> JointSpaceState {
        let mut js = self.rest(self.base);
        for (j, q) in js.joints.iter_mut().enumerate() {
            let k = j as f64;
            let axis = Vec3::new((1.7 * k + 0.3).sin(), (1.1 * k + 0.5).cos(), 0.6 * (0.9 * k + 1.0).sin())
                .try_normalize()
                .unwrap_or(Vec3::Y);
            let angle = self.p.amplitude * (2.0 * PI * self.p.frequency * t + 0.37 * k).sin();
            *q = Quat::from_axis_angle(axis, angle);
        }
        js
    }

    /// Right-leg kick: wind-up (hip back, knee bent), fast forward strike with
    /// the knee extending, then recovery to standing.
    fn kick(&self, t: f64) -> Result<JointSpaceState, Error> {
        self.require(&["r_thigh", "r_shin"])?;
        let hip = keyframes(&[(0.3, 0.0), (0.6, 0.6), (0.8, -0.8), (1.4, 0.0)], t);
        let knee = keyframes(&[(0.3, 0.0), (0.6, 1.2), (0.8, 0.1), (1.4, 0.0)], t);
        let mut js = self.rest(self.base);
        self.set(&mut js, "r_thigh", pitch(hip));
        self.set(&mut js, "r_shin", pitch(knee));
        Ok(js)
    }

    /// Sits down with vertical shins and planted feet: thighs pitch forward
    /// by `alpha` while the pelvis drops and moves back.
    fn squat(&self, t: f64) -> Result<JointSpaceState, Error> {
        self.require(&["l_thigh", "l_shin", "r_thigh", "r_shin"])?;
        let thigh = &self.spec.links()[self.spec.link_index("l_thigh").unwrap()];
        let shin = &self.spec.links()[self.spec.link_index("l_shin").unwrap()];
        let femur = (shin.anchor_parent - thigh.anchor_child).norm();
        if self.p.depth >= femur {
            return Err(Error::Motion(format!("squat depth {} exceeds thigh length {femur}", self.p.depth)));
        }
        let drop = self.p.depth * smoothstep((t - 0.5) / 1.5);
        let alpha = (1.0 - drop / femur).acos();
        let root = self.base + Vec3::new(-femur * alpha.sin(), 0.0, -drop);
        let mut js = self.rest(root);
        for side in ["l", "r"] {
            self.set(&mut js, &format!("{side}_thigh"), pitch(-alpha));
            self.set(&mut js, &format!("{side}_shin"), pitch(alpha));
        }
        Ok(js)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{build_humanoid, forward_kinematics};

    fn h22() -> ArticulatedBodySpec {
        build_humanoid("humanoid22", 1.0).unwrap()
    }

    #[test]
    fn static_one_second() {
        let m = synth_motion(&h22(), &SynthParams::new("static")).unwrap();
        assert_eq!(m.len(), 30);
        assert!(m.frames().iter().all(|f| *f == m.frames()[0]));
    }

    #[test]
    fn walk_advances_one_centimetre_per_frame() {
        let m = synth_motion(&h22(), &SynthParams::new("walk_forward")).unwrap();
        assert_eq!(m.len(), 300);
        for w in m.frames().windows(2) {
            assert!((w[1].root.position.x - w[0].root.position.x - 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_amplitude_sine_is_static() {
        let spec = h22();
        let sine = SynthParams { amplitude: 0.0, ..SynthParams::new("sine_joints") }.with_frames(40);
        let stat = SynthParams::new("static").with_frames(40);
        assert_eq!(synth_motion(&spec, &sine).unwrap(), synth_motion(&spec, &stat).unwrap());
    }

    #[test]
    fn unknown_kind_and_missing_links() {
        assert!(matches!(synth_motion(&h22(), &SynthParams::new("dance")), Err(Error::UnknownMotion(_))));
        let chain = build_humanoid("chain3", 1.0).unwrap();
        assert!(matches!(synth_motion(&chain, &SynthParams::new("kick")), Err(Error::Motion(_))));
        assert!(synth_motion(&chain, &SynthParams::new("walk_forward")).is_ok());
    }

    #[test]
    fn squat_keeps_feet_planted() {
        let spec = h22();
        let m = synth_motion(&spec, &SynthParams::new("squat_sit")).unwrap();
        let foot = spec.link_index("l_foot").unwrap();
        let first = forward_kinematics(&spec, &m.frames()[0])[foot];
        let last = forward_kinematics(&spec, m.frames().last().unwrap())[foot];
        assert!((first.position - last.position).norm() < 1e-9);
        assert!(first.orientation.angle_to(last.orientation) < 1e-9);
        let drop = m.frames()[0].root.position.z - m.frames().last().unwrap().root.position.z;
        assert!((drop - 0.35).abs() < 1e-9);
    }

    #[test]
    fn walk_never_drops_below_standing() {
        let spec = h22();
        let m = synth_motion(&spec, &SynthParams::new("walk_forward")).unwrap();
        for f in m.frames() {
            assert!(spec.lowest_point(&forward_kinematics(&spec, f)) > 0.0099);
        }
    }
}
