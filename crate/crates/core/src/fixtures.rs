//! Reference scenes used by the test suites, the acceptance run and the
//! bundled scenario files.

use std::f64::consts::PI;

use crate::body::{build_humanoid, ArticulatedBodySpec, JointSpaceState, LinkSpec};
use crate::dynamics::{ControlMode, SimConfig};
use crate::kinematics::{synth_motion, MotionSequence, SynthParams};
use crate::math::{shape_inertia, Pose, Quat, Vec3};
use crate::scenario::{RigidObjectSpec, SceneSpec, StaticCollider};
use crate::shape::Shape;

/// Everything needed for one simulation run.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub spec: ArticulatedBodySpec,
    pub motion: MotionSequence,
    pub scene: SceneSpec,
    pub config: SimConfig,
    pub mode: ControlMode,
}

impl Fixture {
    fn humanoid(motion: SynthParams, scene: SceneSpec) -> Self {
        let spec = build_humanoid("humanoid22", 1.0).expect("built-in template");
        let motion = synth_motion(&spec, &motion).expect("built-in motion");
        Self { spec, motion, scene, config: SimConfig::default(), mode: ControlMode::HP }
    }

    pub fn with_mode(mut self, mode: ControlMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_config(mut self, config: SimConfig) -> Self {
        self.config = config;
        self
    }
}

fn floor_scene() -> SceneSpec {
    SceneSpec { static_colliders: vec![StaticCollider::floor()], objects: Vec::new() }
}

/// humanoid22 running a synthetic motion for 300 frames in an empty scene.
pub fn free_space(kind: &str) -> Fixture {
    Fixture::humanoid(SynthParams::new(kind).with_frames(300), SceneSpec::default())
}

/// Walks forward at 0.3 m/s into a wall whose face is 0.5 m ahead of the pelvis.
pub fn wall_walk() -> Fixture {
    let mut scene = floor_scene();
    scene.static_colliders.push(StaticCollider::new(
        "wall",
        Shape::cuboid(0.25, 2.0, 1.5),
        Pose::from_position(Vec3::new(0.75, 0.0, 1.5)),
    ));
    Fixture::humanoid(SynthParams::new("walk_forward").with_frames(300), scene)
}

/// Top of the seat in [`sit_on_box`], m.
pub const SEAT_HEIGHT: f64 = 0.6;

/// Squats onto a box seat that is higher than the motion's sitting depth.
pub fn sit_on_box() -> Fixture {
    let mut scene = floor_scene();
    scene.static_colliders.push(StaticCollider::new(
        "seat",
        Shape::cuboid(0.275, 0.14, SEAT_HEIGHT / 2.0),
        Pose::from_position(Vec3::new(-0.375, 0.0, SEAT_HEIGHT / 2.0)),
    ));
    Fixture::humanoid(SynthParams::new("squat_sit").with_frames(120), scene)
}

pub const BALL_RADIUS: f64 = 0.11;
/// Ball masses of the kick sweep, kg.
pub const KICK_MASSES: [f64; 4] = [0.5, 5.0, 50.0, 200.0];
/// Ball start position in [`kick`].
pub const BALL_START: Vec3 = Vec3::new(0.35, -0.24, BALL_RADIUS);

/// Right-leg kick at a ball resting on the floor ahead of the right foot and
/// slightly outboard, so the foot strikes it off-centre.
pub fn kick(ball_mass: f64) -> Fixture {
    kick_at(ball_mass, BALL_START)
}

pub fn kick_at(ball_mass: f64, ball: Vec3) -> Fixture {
    let mut scene = floor_scene();
    scene.objects.push(RigidObjectSpec::new("ball", Shape::sphere(BALL_RADIUS), ball_mass, Pose::from_position(ball)));
    Fixture::humanoid(SynthParams::new("kick").with_frames(90), scene)
}

/// Timing and geometry of [`squeeze_lift`].
pub mod squeeze {
    /// Half size of the lifted cube, m.
    pub const BOX_HALF: f64 = 0.1;
    pub const BOX_MASS: f64 = 2.0;
    pub const LIFT: f64 = 0.3;
    pub const FPS: f64 = 30.0;
    /// Plates close between these times, s.
    pub const CLOSE: (f64, f64) = (0.3, 0.8);
    /// The carrier rises between these times, s.
    pub const RAISE: (f64, f64) = (1.0, 2.0);
    /// Total length, s; the last second holds the box at the top.
    pub const DURATION: f64 = 3.0;
    /// How far each plate's target passes the box face, m.
    pub const SQUEEZE: f64 = 0.04;
    pub const PJSC_LAMBDA: f64 = 60.0;
    pub const ARM: f64 = 0.15;
    pub const GAP: f64 = 0.03;
    pub const PLATE_HALF: [f64; 3] = [0.08, 0.01, 0.08];
}

/// Two-plate gripper: a carrier bar with one arm per side, each arm carrying
/// a vertical plate. Arms and bar do not collide.
pub fn gripper_body() -> ArticulatedBodySpec {
    use squeeze::*;
    let link = |name: &str, parent: Option<usize>, ap: Vec3, ac: Vec3, shape: Shape, mass: f64, collide: bool| LinkSpec {
        name: name.into(),
        parent,
        anchor_parent: ap,
        anchor_child: ac,
        inertia: shape_inertia(&shape, mass).expect("positive mass"),
        shape,
        collision_enabled: collide,
    };
    let half_y = BOX_HALF + PLATE_HALF[1] + GAP;
    let arm = Shape::capsule(0.01, ARM / 2.0);
    let plate = Shape::cuboid(PLATE_HALF[0], PLATE_HALF[1], PLATE_HALF[2]);
    let links = vec![
        link("bar", None, Vec3::ZERO, Vec3::ZERO, Shape::cuboid(0.05, half_y, 0.02), 20.0, false),
        link("l_arm", Some(0), Vec3::new(0.0, half_y, 0.0), Vec3::new(0.0, 0.0, ARM / 2.0), arm.clone(), 0.5, false),
        link("l_plate", Some(1), Vec3::new(0.0, 0.0, -ARM / 2.0), Vec3::new(0.0, 0.0, PLATE_HALF[2]), plate.clone(), 1.0, true),
        link("r_arm", Some(0), Vec3::new(0.0, -half_y, 0.0), Vec3::new(0.0, 0.0, ARM / 2.0), arm, 0.5, false),
        link("r_plate", Some(3), Vec3::new(0.0, 0.0, -ARM / 2.0), Vec3::new(0.0, 0.0, PLATE_HALF[2]), plate, 1.0, true),
    ];
    ArticulatedBodySpec::new("gripper", links).expect("valid gripper")
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Height of the gripper bar above the floor at rest, m.
pub fn gripper_bar_height() -> f64 {
    use squeeze::*;
    // Plate centres level with the box centre.
    BOX_HALF + ARM + PLATE_HALF[2]
}

/// Closes the plates on a cube, lifts it and holds it. The grip relies on
/// PJSC torques to keep squeezing between frames.
pub fn squeeze_lift(box_friction: f64) -> Fixture {
    use squeeze::*;
    let spec = gripper_body();
    let close_angle = ((GAP + SQUEEZE) / ARM).asin();
    let frames = (DURATION * FPS).round() as usize;
    let motion: Vec<JointSpaceState> = (0..frames)
        .map(|i| {
            let t = i as f64 / FPS;
            let a = close_angle * smoothstep((t - CLOSE.0) / (CLOSE.1 - CLOSE.0));
            let z = gripper_bar_height() + LIFT * smoothstep((t - RAISE.0) / (RAISE.1 - RAISE.0));
            let mut js = JointSpaceState::with_root(Pose::from_position(Vec3::new(0.0, 0.0, z)), 4);
            // Left arm swings toward -y (negative rotation about x), right arm
            // toward +y; the plates counter-rotate to stay vertical.
            js.joints[0] = Quat::from_axis_angle(Vec3::X, -a);
            js.joints[1] = Quat::from_axis_angle(Vec3::X, a);
            js.joints[2] = Quat::from_axis_angle(Vec3::X, a);
            js.joints[3] = Quat::from_axis_angle(Vec3::X, -a);
            js
        })
        .collect();
    let mut cube = RigidObjectSpec::new(
        "box",
        Shape::cuboid(BOX_HALF, BOX_HALF, BOX_HALF),
        BOX_MASS,
        Pose::from_position(Vec3::new(0.0, 0.0, BOX_HALF)),
    );
    cube.friction = box_friction;
    let mut scene = floor_scene();
    scene.objects.push(cube);
    Fixture {
        spec,
        motion: MotionSequence::new(FPS, motion).expect("valid motion"),
        scene,
        config: SimConfig::default(),
        mode: ControlMode::HalfPhysics { pjsc_lambda: PJSC_LAMBDA },
    }
}

/// Raises the right arm sideways through a static pillar.
pub fn arm_pillar(pjsc_lambda: f64) -> Fixture {
    let spec = build_humanoid("humanoid22", 1.0).expect("built-in template");
    let arm = spec.link_index("r_upper_arm").expect("template link") - 1;
    let elbow = spec.link_index("r_forearm").expect("template link") - 1;
    let base = synth_motion(&spec, &SynthParams::new("static").with_frames(90)).expect("built-in motion");
    let frames: Vec<JointSpaceState> = base
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let t = i as f64 / 30.0;
            let lift = 1.4 * (PI * (t / 2.5).min(1.0)).sin().max(0.0);
            let mut js = f.clone();
            js.joints[arm] = Quat::from_axis_angle(Vec3::X, -lift);
            js.joints[elbow] = Quat::from_axis_angle(Vec3::Y, -0.4 * lift);
            js
        })
        .collect();
    let mut scene = floor_scene();
    scene.static_colliders.push(StaticCollider::new(
        "pillar",
        Shape::capsule(0.04, 1.0),
        Pose::from_position(Vec3::new(0.0, -0.5, 1.0)),
    ));
    Fixture {
        spec,
        motion: MotionSequence::new(30.0, frames).expect("valid motion"),
        scene,
        config: SimConfig::default(),
        mode: ControlMode::HalfPhysics { pjsc_lambda },
    }
}

/// Three boxes stacked on the floor beside a standing human, 10 s.
pub fn resting_stack() -> Fixture {
    let mut scene = floor_scene();
    for (k, h) in [0.15, 0.1, 0.05].into_iter().enumerate() {
        let below: f64 = [0.15, 0.1, 0.05][..k].iter().map(|x| 2.0 * x).sum();
        scene.objects.push(RigidObjectSpec::new(
            format!("box{k}"),
            Shape::cuboid(h, h, h),
            8.0 * h * h * h * 500.0,
            Pose::from_position(Vec3::new(1.5, 0.5, below + h)),
        ));
    }
    Fixture::humanoid(SynthParams::new("static").with_frames(300), scene)
}

/// A ball at least 0.5 m from every point of a walking human.
pub fn bystander_object() -> Fixture {
    let mut scene = floor_scene();
    scene.objects.push(RigidObjectSpec::new("ball", Shape::sphere(0.1), 1.0, Pose::from_position(Vec3::new(1.5, 1.2, 0.1))));
    Fixture::humanoid(SynthParams::new("walk_forward").with_frames(300), scene)
}

/// humanoid22 walking among 5 objects and 20 static colliders.
pub fn bench_scene() -> Fixture {
    let mut scene = floor_scene();
    for k in 0..19 {
        let x = -2.0 + 0.5 * (k % 10) as f64;
        let y = if k < 10 { 2.0 } else { -2.0 };
        scene.static_colliders.push(StaticCollider::new(
            format!("post{k}"),
            Shape::cuboid(0.1, 0.1, 0.5),
            Pose::from_position(Vec3::new(x, y, 0.5)),
        ));
    }
    for k in 0..5 {
        let shape = match k % 3 {
            0 => Shape::sphere(0.1),
            1 => Shape::cuboid(0.1, 0.1, 0.1),
            _ => Shape::capsule(0.05, 0.1),
        };
        let z = match k % 3 {
            0 | 1 => 0.1,
            _ => 0.05,
        };
        let mut o = RigidObjectSpec::new(format!("obj{k}"), shape, 1.0 + k as f64, Pose::from_position(Vec3::new(-1.0 + 0.6 * k as f64, 1.0, z)));
        if k % 3 == 2 {
            o.pose.orientation = Quat::from_axis_angle(Vec3::X, PI / 2.0);
        }
        scene.objects.push(o);
    }
    Fixture::humanoid(SynthParams::new("walk_forward").with_frames(300), scene)
}
