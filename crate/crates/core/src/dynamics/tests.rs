use std::f64::consts::PI;

use super::*;
use crate::body::{build_humanoid, forward_kinematics, TEMPLATES};
use crate::collision::{narrowphase, ContactPoint};
use crate::fixtures;
use crate::kinematics::{frame_velocities, synth_motion, SynthParams, SYNTH_KINDS};
use crate::scenario::StaticCollider;

fn ball(name: &str, r: f64, mass: f64, at: Vec3) -> RigidObjectSpec {
    RigidObjectSpec::new(name, Shape::sphere(r), mass, Pose::from_position(at))
}

fn state_of(o: &RigidObjectSpec, v: Vec3) -> RigidObjectState {
    RigidObjectState { pose: o.pose, velocity: SpatialVelocity::new(v, Vec3::ZERO) }
}

fn floor_contact(r: f64, z: f64) -> Contact {
    let floor = StaticCollider::floor();
    let cp = narrowphase(&Shape::sphere(r), &Pose::from_position(Vec3::new(0.0, 0.0, z)), &floor.shape, &floor.pose)
        .unwrap()[0];
    Contact::new(ColliderId::Object(0), ColliderId::Static(0), cp, 0.5, 0.0)
}

#[test]
fn expected_pose_examples() {
    let q = Quat::from_axis_angle(Vec3::new(1.0, 2.0, 0.5).normalize(), 0.7);
    assert_eq!(expected_joint_pose(q, Vec3::new(0.3, 0.1, 0.0), 0, 0.01), q);
    assert!(expected_joint_pose(q, Vec3::ZERO, 5, 0.01).angle_to(q) < 1e-15);
    let got = expected_joint_pose(q, Vec3::new(0.0, 0.0, PI), 4, 0.125);
    let oracle = Quat::from_axis_angle(Vec3::Z, PI / 2.0) * q;
    assert!(got.angle_to(oracle) < 1e-12);
}

#[test]
fn pjsc_torque_examples() {
    let q = Quat::from_axis_angle(Vec3::X, 0.4);
    assert_eq!(pjsc_torque(3.0, q, q), Vec3::ZERO);
    assert_eq!(pjsc_torque(0.0, q, Quat::IDENTITY), Vec3::ZERO);
    let actual = Quat::from_axis_angle(Vec3::Z, 0.1) * q;
    let tau = pjsc_torque(2.0, actual, q);
    assert!(tau.distance(Vec3::new(0.0, 0.0, -0.2)) < 1e-12, "{tau:?}");
}

#[test]
fn enforce_zero_velocities() {
    let spec = build_humanoid("humanoid22", 1.0).unwrap();
    let poses = forward_kinematics(&spec, &JointSpaceState::rest(spec.joint_count()));
    let vels = enforce_frame_velocities(&spec, &poses, &FrameVelocities::zero(spec.joint_count()));
    assert!(vels.iter().all(|v| v.linear == Vec3::ZERO && v.angular == Vec3::ZERO));
}

#[test]
fn enforce_walk_pelvis_velocity() {
    let spec = build_humanoid("humanoid22", 1.0).unwrap();
    let seq = synth_motion(&spec, &SynthParams::new("walk_forward").with_frames(30)).unwrap();
    let current = seq.frames()[4].clone();
    let fv = frame_velocities(&seq, 5, &current).unwrap();
    let vels = enforce_frame_velocities(&spec, &forward_kinematics(&spec, &current), &fv);
    // 0.01 m per frame at 30 fps
    assert!(vels[0].linear.distance(Vec3::new(0.3, 0.0, 0.0)) < 1e-9);
}

#[test]
fn enforce_joint_only_matches_finite_difference() {
    let spec = build_humanoid("chain3", 1.0).unwrap();
    let mut js = JointSpaceState::rest(spec.joint_count());
    js.joints[0] = Quat::from_axis_angle(Vec3::Y, 0.3);
    js.joints[1] = Quat::from_axis_angle(Vec3::X, -0.5);
    let omegas = vec![Vec3::new(0.2, -0.4, 0.1), Vec3::new(0.0, 0.7, -0.3)];
    let fv = FrameVelocities { root_linear: Vec3::ZERO, root_angular: Vec3::ZERO, joint_omegas: omegas.clone() };
    let poses = forward_kinematics(&spec, &js);
    let vels = enforce_frame_velocities(&spec, &poses, &fv);

    let eps = 1e-6;
    let mut ahead = js.clone();
    for (q, w) in ahead.joints.iter_mut().zip(&omegas) {
        *q = integrate_orientation(*q, *w, eps);
    }
    let next = forward_kinematics(&spec, &ahead);
    assert_eq!(vels[0].linear, Vec3::ZERO);
    for i in 1..spec.link_count() {
        let fd = (next[i].position - poses[i].position) * (1.0 / eps);
        assert!(fd.distance(vels[i].linear) < 1e-5, "link {i}");
        let w_fd = (next[i].orientation * poses[i].orientation.conj()).log() * (1.0 / eps);
        assert!(w_fd.distance(vels[i].angular) < 1e-5, "link {i}");
    }
}

#[test]
fn falling_sphere_stops_at_floor() {
    let config = SimConfig::default();
    let h = 1.0 / 240.0;
    let o = ball("b", 0.1, 1.0, Vec3::new(0.0, 0.0, 0.1));
    let mut states = vec![state_of(&o, Vec3::new(0.0, 0.0, -1.0))];
    let c = floor_contact(0.1, 0.1);
    let imp = solve_constraints(&[o], &mut states, &[c], h, &config).unwrap();
    let vn = states[0].velocity.linear.z;
    let bias = config.baumgarte_beta * (config.contact_skin - c.separation).max(0.0) / h;
    assert!((-1e-12..=bias + 1e-12).contains(&vn), "vn {vn} bias {bias}");
    assert!(imp[0].normal > 0.99);
}

#[test]
fn elastic_equal_masses_exchange_velocities() {
    let config = SimConfig::default();
    let mut a = ball("a", 0.1, 2.0, Vec3::ZERO);
    let mut b = ball("b", 0.1, 2.0, Vec3::new(0.2, 0.0, 0.0));
    a.restitution = 1.0;
    b.restitution = 1.0;
    let mut states = vec![state_of(&a, Vec3::new(1.0, 0.0, 0.0)), state_of(&b, Vec3::ZERO)];
    let cp = narrowphase(&a.shape, &a.pose, &b.shape, &b.pose).unwrap()[0];
    let c = Contact::new(ColliderId::Object(0), ColliderId::Object(1), cp, 0.0, 1.0);
    solve_constraints(&[a, b], &mut states, &[c], 1.0 / 240.0, &config).unwrap();
    assert!(states[0].velocity.linear.norm() < 1e-6);
    assert!(states[1].velocity.linear.distance(Vec3::new(1.0, 0.0, 0.0)) < 1e-6);
}

#[test]
fn resting_contact_impulse_is_bias_level() {
    let config = SimConfig::default();
    let h = 1.0 / 240.0;
    let o = ball("b", 0.1, 3.0, Vec3::new(0.0, 0.0, 0.1 - config.slop));
    let mut states = vec![state_of(&o, Vec3::ZERO)];
    let c = floor_contact(0.1, 0.1 - config.slop);
    let imp = solve_constraints(&[o], &mut states, &[c], h, &config).unwrap();
    let bias = config.baumgarte_beta * (config.contact_skin + config.slop) / h;
    assert!(imp[0].impulse.norm() <= 3.0 * bias + 1e-12);
    assert!(states[0].velocity.linear.z <= bias + 1e-12);
    assert!(states[0].velocity.linear.x.abs() < 1e-12 && states[0].velocity.linear.y.abs() < 1e-12);
}

#[test]
fn solve_constraints_checks_lengths() {
    let o = ball("b", 0.1, 1.0, Vec3::ZERO);
    let r = solve_constraints(&[o], &mut [], &[], 0.01, &SimConfig::default());
    assert!(matches!(r, Err(Error::Mismatch(_))));
}

#[test]
fn contact_impulses_are_antisymmetric() {
    let f = fixtures::kick(5.0);
    let mut sim = Simulator::new(f.spec.clone(), &f.scene, f.config, f.mode, &f.motion.frames()[0]).unwrap();
    let mut seen = 0;
    for t in 1..f.motion.len() {
        sim.step_frame(&f.motion, t).unwrap();
        for c in sim.last_impulses() {
            assert_eq!(c.on_b(), -c.on_a());
            assert!(c.normal >= 0.0);
            let t_mag = (c.tangent[0] * c.tangent[0] + c.tangent[1] * c.tangent[1]).sqrt();
            assert!(t_mag <= std::f64::consts::SQRT_2 * c.contact.friction * c.normal + 1e-12);
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn free_space_tracks_targets_exactly() {
    for template in TEMPLATES {
        let spec = build_humanoid(template, 1.0).unwrap();
        for kind in SYNTH_KINDS {
            let Ok(seq) = synth_motion(&spec, &SynthParams::new(kind).with_frames(60)) else {
                // leg motions need a humanoid
                assert_eq!(template, "chain3");
                continue;
            };
            let traj = run(&spec, &seq, &SceneSpec::default(), &SimConfig::default(), ControlMode::HP).unwrap();
            for (rec, target) in traj.records.iter().zip(seq.frames()) {
                let goal = forward_kinematics(&spec, target);
                let worst = rec.links.iter().zip(&goal).map(|(a, b)| a.position.distance(b.position)).fold(0.0, f64::max);
                assert!(worst <= 1e-6, "{template} {kind} frame {}: {worst}", rec.frame);
            }
        }
    }
}

#[test]
fn pjsc_is_neutral_without_contacts() {
    let f = fixtures::free_space("sine_joints");
    let a = run(&f.spec, &f.motion, &f.scene, &f.config, ControlMode::HP).unwrap();
    let b = run(&f.spec, &f.motion, &f.scene, &f.config, ControlMode::HalfPhysics { pjsc_lambda: 1.0 }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn object_collision_conserves_momentum() {
    let spec = build_humanoid("chain3", 1.0).unwrap();
    let seq = synth_motion(&spec, &SynthParams::new("static").with_frames(40)).unwrap();
    let mut a = ball("a", 0.1, 1.5, Vec3::new(3.0, 0.0, 1.0));
    a.velocity.linear = Vec3::new(1.0, 0.1, 0.0);
    a.restitution = 0.4;
    let mut b = RigidObjectSpec::new("b", Shape::cuboid(0.1, 0.15, 0.1), 4.0, Pose::from_position(Vec3::new(3.5, 0.05, 1.02)));
    b.velocity.linear = Vec3::new(-0.5, 0.0, 0.0);
    let scene = SceneSpec { static_colliders: Vec::new(), objects: vec![a, b] };
    let config = SimConfig { gravity: Vec3::ZERO, ..SimConfig::default() };
    let traj = run(&spec, &seq, &scene, &config, ControlMode::HP).unwrap();
    let momentum = |r: &FrameRecord| r.objects[0].velocity.linear * 1.5 + r.objects[1].velocity.linear * 4.0;
    let mut collided = false;
    for (w, d) in traj.records.windows(2).zip(&traj.diagnostics[1..]) {
        assert!(momentum(&w[0]).distance(momentum(&w[1])) < 1e-6);
        collided |= d.contacts > 0;
    }
    assert!(collided);
    assert!(traj.records.last().unwrap().objects[0].velocity.linear.x < 0.5);
}

#[test]
fn resting_object_stays_put() {
    let spec = build_humanoid("chain3", 1.0).unwrap();
    let seq = synth_motion(&spec, &SynthParams::new("static").with_frames(300)).unwrap();
    let mut scene = SceneSpec { static_colliders: vec![StaticCollider::floor()], objects: Vec::new() };
    scene.objects.push(ball("ball", 0.1, 1.0, Vec3::new(2.0, 0.0, 0.1)));
    scene.objects.push(RigidObjectSpec::new("crate", Shape::cuboid(0.2, 0.2, 0.2), 5.0, Pose::from_position(Vec3::new(-2.0, 0.0, 0.2))));
    let traj = run(&spec, &seq, &scene, &SimConfig::default(), ControlMode::HP).unwrap();
    let (first, last) = (&traj.records[0], traj.records.last().unwrap());
    for k in 0..2 {
        assert!(first.objects[k].pose.position.distance(last.objects[k].pose.position) < 2e-3);
    }
}

#[test]
fn runs_are_deterministic() {
    let f = fixtures::kick(0.5);
    let a = run(&f.spec, &f.motion, &f.scene, &f.config, f.mode).unwrap();
    let b = run(&f.spec, &f.motion, &f.scene, &f.config, f.mode).unwrap();
    assert_eq!(a, b);
}

#[test]
fn wall_walk_stays_within_penetration_bound() {
    let f = fixtures::wall_walk();
    let traj = run(&f.spec, &f.motion, &f.scene, &f.config, f.mode).unwrap();
    let stats = crate::metrics::penetration_stats(&traj, &f.scene, &f.spec, 64).unwrap();
    assert!(stats.depth_max <= 1000.0 * (f.config.slop + 1e-3), "{}", stats.depth_max);
}

#[test]
fn teleport_ignores_collisions() {
    let f = fixtures::wall_walk().with_mode(ControlMode::PositionTeleport);
    let traj = run(&f.spec, &f.motion, &f.scene, &f.config, f.mode).unwrap();
    for (rec, target) in traj.records.iter().zip(f.motion.frames()) {
        assert_eq!(rec.joints, target.joints);
        assert!(rec.root.position.distance(target.root.position) < 1e-12);
    }
}

#[test]
fn step_frame_rejects_bad_index_and_mismatch() {
    let f = fixtures::free_space("static");
    let mut sim = Simulator::new(f.spec.clone(), &f.scene, f.config, f.mode, &f.motion.frames()[0]).unwrap();
    assert!(matches!(sim.step_frame(&f.motion, f.motion.len()), Err(Error::FrameOutOfRange { .. })));
    let other = build_humanoid("chain3", 1.0).unwrap();
    let seq = synth_motion(&other, &SynthParams::new("static")).unwrap();
    assert!(matches!(sim.step_frame(&seq, 1), Err(Error::Mismatch(_))));
    assert!(sim.step_frame(&f.motion, 1).is_ok());
    assert_eq!(sim.state().frame, 1);
}

#[test]
fn invalid_settings_are_rejected() {
    let f = fixtures::free_space("static");
    let init = &f.motion.frames()[0];
    let bad = [
        SimConfig { substeps: 0, ..SimConfig::default() },
        SimConfig { baumgarte_beta: 1.5, ..SimConfig::default() },
        SimConfig { joint_damping: -1.0, ..SimConfig::default() },
    ];
    for c in bad {
        assert!(Simulator::new(f.spec.clone(), &f.scene, c, ControlMode::HP, init).is_err());
    }
    let modes = [ControlMode::HalfPhysics { pjsc_lambda: -1.0 }, ControlMode::TorquePD { kp: 1.0, kd: f64::NAN }];
    for m in modes {
        assert!(Simulator::new(f.spec.clone(), &f.scene, SimConfig::default(), m, init).is_err());
    }
}

#[test]
fn state_recovers_consistent_joint_space() {
    let f = fixtures::kick(50.0);
    let mut sim = Simulator::new(f.spec.clone(), &f.scene, f.config, f.mode, &f.motion.frames()[0]).unwrap();
    for t in 1..f.motion.len() {
        sim.step_frame(&f.motion, t).unwrap();
    }
    let s = sim.state();
    let (js, residual) = crate::body::joint_state_from_links(&f.spec, &s.links.poses);
    assert!(residual <= 1e-6);
    for (a, b) in js.joints.iter().zip(&s.joint_state.joints) {
        assert!(a.angle_to(*b) < 1e-9);
    }
}

#[test]
fn contact_point_midpoint_convention() {
    // Swapped narrowphase keeps the overlap midpoint fixed.
    let s = Shape::sphere(0.1);
    let (pa, pb) = (Pose::from_position(Vec3::ZERO), Pose::from_position(Vec3::new(0.15, 0.0, 0.0)));
    let ab: ContactPoint = narrowphase(&s, &pa, &s, &pb).unwrap()[0];
    let ba: ContactPoint = narrowphase(&s, &pb, &s, &pa).unwrap()[0];
    let mid = |c: ContactPoint| c.point - c.normal * (0.5 * c.separation);
    assert!(mid(ab).distance(mid(ba)) < 1e-12);
    assert!(mid(ab).distance(Vec3::new(0.075, 0.0, 0.0)) < 1e-12);
}
