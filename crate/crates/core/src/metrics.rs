//! Tracking fidelity and penetration metrics.
//!
//! Joint positions are link-frame origins. Penetration uses surface samples
//! of every link as a stand-in for mesh vertices.

use serde::{Deserialize, Serialize};

use crate::body::{forward_kinematics, ArticulatedBodySpec};
use crate::collision::{sample_surface_points, signed_distance};
use crate::dynamics::Trajectory;
use crate::kinematics::MotionSequence;
use crate::math::Vec3;
use crate::scenario::SceneSpec;
use crate::Error;

pub const DEFAULT_SAMPLES_PER_LINK: usize = 64;

/// Pelvis height below this fraction of its target counts as fallen.
pub const FALL_HEIGHT_FRACTION: f64 = 0.3;
/// Consecutive fallen frames that make a run a failure.
pub const FALL_FRAMES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// mm
    pub mpjpe_g: f64,
    /// mm, root-relative
    pub mpjpe: f64,
    pub success: bool,
    /// % of surface samples inside static geometry, averaged over frames
    pub pene_rate: f64,
    /// mm
    pub depth_mean: f64,
    /// mm
    pub depth_max: f64,
    pub frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PenetrationStats {
    pub pene_rate: f64,
    pub depth_mean: f64,
    pub depth_max: f64,
}

fn check_counts(traj: &Trajectory, seq: &MotionSequence, spec: &ArticulatedBodySpec) -> Result<(), Error> {
    if traj.len() != seq.len() {
        return Err(Error::Mismatch(format!("trajectory has {} frames, motion has {}", traj.len(), seq.len())));
    }
    if seq.joint_count() != spec.joint_count() {
        return Err(Error::Mismatch(format!("motion has {} joints, body has {}", seq.joint_count(), spec.joint_count())));
    }
    if let Some(r) = traj.records.iter().find(|r| r.links.len() != spec.link_count()) {
        return Err(Error::Mismatch(format!(
            "frame {} has {} links, body has {}",
            r.frame,
            r.links.len(),
            spec.link_count()
        )));
    }
    Ok(())
}

fn mpjpe_with(
    traj: &Trajectory,
    seq: &MotionSequence,
    spec: &ArticulatedBodySpec,
    relative: bool,
) -> Result<f64, Error> {
    check_counts(traj, seq, spec)?;
    if traj.is_empty() {
        return Ok(0.0);
    }
    let mut frame_sum = 0.0;
    for (rec, target) in traj.records.iter().zip(seq.frames()) {
        let goal = forward_kinematics(spec, target);
        let (ro, go) = if relative { (rec.links[0].position, goal[0].position) } else { (Vec3::ZERO, Vec3::ZERO) };
        let err: f64 = rec.links.iter().zip(&goal).map(|(a, b)| (a.position - ro).distance(b.position - go)).sum();
        frame_sum += err / goal.len() as f64;
    }
    Ok(1000.0 * frame_sum / traj.len() as f64)
}

/// Mean world-frame joint position error, mm.
pub fn mpjpe_global(traj: &Trajectory, seq: &MotionSequence, spec: &ArticulatedBodySpec) -> Result<f64, Error> {
    mpjpe_with(traj, seq, spec, false)
}

/// Mean joint position error after subtracting each side's root position, mm.
pub fn mpjpe_local(traj: &Trajectory, seq: &MotionSequence, spec: &ArticulatedBodySpec) -> Result<f64, Error> {
    mpjpe_with(traj, seq, spec, true)
}

/// Penetration of the human's surface samples into static colliders.
///
/// `depth_mean` averages each frame's deepest penetration, counting frames
/// without penetration as zero.
pub fn penetration_stats(
    traj: &Trajectory,
    scene: &SceneSpec,
    spec: &ArticulatedBodySpec,
    samples_per_link: usize,
) -> Result<PenetrationStats, Error> {
    if samples_per_link < 16 {
        return Err(Error::InvalidSpec(format!("need at least 16 samples per link, got {samples_per_link}")));
    }
    let samples: Vec<Vec<Vec3>> =
        spec.links().iter().map(|l| sample_surface_points(&l.shape, samples_per_link)).collect();
    let total: usize = samples.iter().map(Vec::len).sum();
    if traj.is_empty() || total == 0 {
        return Ok(PenetrationStats::default());
    }
    let mut rate_sum = 0.0;
    let mut depth_sum = 0.0;
    let mut depth_max: f64 = 0.0;
    for rec in &traj.records {
        if rec.links.len() != spec.link_count() {
            return Err(Error::Mismatch(format!("frame {} has {} links", rec.frame, rec.links.len())));
        }
        let mut inside = 0usize;
        let mut deepest: f64 = 0.0;
        for (pose, pts) in rec.links.iter().zip(&samples) {
            for p in pts {
                let w = pose.transform_point(*p);
                let d = scene
                    .static_colliders
                    .iter()
                    .map(|s| signed_distance(&s.shape, &s.pose, w))
                    .fold(f64::INFINITY, f64::min);
                if d < 0.0 {
                    inside += 1;
                    deepest = deepest.max(-d);
                }
            }
        }
        rate_sum += inside as f64 / total as f64;
        depth_sum += deepest;
        depth_max = depth_max.max(deepest);
    }
    let n = traj.len() as f64;
    Ok(PenetrationStats { pene_rate: 100.0 * rate_sum / n, depth_mean: 1000.0 * depth_sum / n, depth_max: 1000.0 * depth_max })
}

/// False when the pelvis stays below 30% of its target height for 10
/// consecutive frames.
pub fn success(traj: &Trajectory, seq: &MotionSequence) -> bool {
    let mut run = 0;
    for (rec, target) in traj.records.iter().zip(seq.frames()) {
        if rec.root.position.z < FALL_HEIGHT_FRACTION * target.root.position.z {
            run += 1;
            if run >= FALL_FRAMES {
                return false;
            }
        } else {
            run = 0;
        }
    }
    true
}

pub fn evaluate(
    traj: &Trajectory,
    seq: &MotionSequence,
    spec: &ArticulatedBodySpec,
    scene: &SceneSpec,
    samples_per_link: usize,
) -> Result<MetricsReport, Error> {
    let pen = penetration_stats(traj, scene, spec, samples_per_link)?;
    Ok(MetricsReport {
        mpjpe_g: mpjpe_global(traj, seq, spec)?,
        mpjpe: mpjpe_local(traj, seq, spec)?,
        success: success(traj, seq),
        pene_rate: pen.pene_rate,
        depth_mean: pen.depth_mean,
        depth_max: pen.depth_max,
        frames: traj.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{build_humanoid, LinkSpec};
    use crate::dynamics::{kinematic_replay, run, ControlMode, SimConfig};
    use crate::kinematics::{synth_motion, SynthParams};
    use crate::math::{shape_inertia, Pose};
    use crate::scenario::StaticCollider;
    use crate::shape::Shape;
    use proptest::prelude::*;

    fn walk() -> (ArticulatedBodySpec, MotionSequence) {
        let spec = build_humanoid("humanoid22", 1.0).unwrap();
        let seq = synth_motion(&spec, &SynthParams::new("walk_forward").with_frames(20)).unwrap();
        (spec, seq)
    }

    fn shifted(traj: &Trajectory, f: impl Fn(usize, usize) -> Vec3) -> Trajectory {
        let mut out = traj.clone();
        for (t, rec) in out.records.iter_mut().enumerate() {
            for (i, p) in rec.links.iter_mut().enumerate() {
                p.position += f(t, i);
            }
            rec.root = rec.links[0];
        }
        out
    }

    #[test]
    fn identical_trajectory_scores_zero() {
        let (spec, seq) = walk();
        let traj = kinematic_replay(&spec, &seq, &SceneSpec::default());
        assert_eq!(mpjpe_global(&traj, &seq, &spec).unwrap(), 0.0);
        assert_eq!(mpjpe_local(&traj, &seq, &spec).unwrap(), 0.0);
    }

    #[test]
    fn uniform_offset_is_ten_mm() {
        let (spec, seq) = walk();
        let traj = shifted(&kinematic_replay(&spec, &seq, &SceneSpec::default()), |_, _| Vec3::new(0.01, 0.0, 0.0));
        assert!((mpjpe_global(&traj, &seq, &spec).unwrap() - 10.0).abs() < 1e-9);
        assert!(mpjpe_local(&traj, &seq, &spec).unwrap() < 1e-9);
    }

    #[test]
    fn single_link_offset_matches_global() {
        let (spec, seq) = walk();
        let elbow = spec.link_index("r_forearm").unwrap();
        let traj = shifted(&kinematic_replay(&spec, &seq, &SceneSpec::default()), |_, i| {
            if i == elbow {
                Vec3::new(0.0, 0.0, 0.01)
            } else {
                Vec3::ZERO
            }
        });
        let g = mpjpe_global(&traj, &seq, &spec).unwrap();
        assert!((g - 10.0 / spec.link_count() as f64).abs() < 1e-9);
        assert!((mpjpe_local(&traj, &seq, &spec).unwrap() - g).abs() < 1e-12);
    }

    #[test]
    fn constructed_local_to_global_ratio() {
        // Every link moves by (a, 0, 0) and every non-root link by a further
        // (0, b, 0). With L links: global = (a + (L-1) sqrt(a² + b²)) / L,
        // local = (L-1) b / L. Solve for a giving local/global = 0.7.
        let (spec, seq) = walk();
        let l = spec.link_count() as f64;
        let b = 0.02;
        let ratio = |a: f64| ((l - 1.0) * b) / (a + (l - 1.0) * (a * a + b * b).sqrt());
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) > 0.7 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        let traj = shifted(&kinematic_replay(&spec, &seq, &SceneSpec::default()), |_, i| {
            Vec3::new(a, if i == 0 { 0.0 } else { b }, 0.0)
        });
        let got = mpjpe_local(&traj, &seq, &spec).unwrap() / mpjpe_global(&traj, &seq, &spec).unwrap();
        assert!((got - 0.7).abs() < 1e-6, "{got}");
    }

    #[test]
    fn random_perturbations_match_oracle() {
        use rand::{Rng, SeedableRng};
        let (spec, seq) = walk();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let offsets: Vec<Vec<Vec3>> = (0..seq.len())
            .map(|_| (0..spec.link_count()).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 0.01).collect())
            .collect();
        let traj = shifted(&kinematic_replay(&spec, &seq, &SceneSpec::default()), |t, i| offsets[t][i]);
        let per_frame: Vec<f64> =
            offsets.iter().map(|f| f.iter().map(|v| v.norm()).sum::<f64>() / f.len() as f64).collect();
        let oracle = 1000.0 * per_frame.iter().sum::<f64>() / per_frame.len() as f64;
        assert!((mpjpe_global(&traj, &seq, &spec).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn mismatched_counts_are_errors() {
        let (spec, seq) = walk();
        let mut traj = kinematic_replay(&spec, &seq, &SceneSpec::default());
        traj.records.pop();
        traj.diagnostics.pop();
        assert!(matches!(mpjpe_global(&traj, &seq, &spec), Err(Error::Mismatch(_))));
        let other = build_humanoid("humanoid55", 1.0).unwrap();
        let full = kinematic_replay(&spec, &seq, &SceneSpec::default());
        assert!(mpjpe_local(&full, &seq, &other).is_err());
    }

    fn ball_body() -> ArticulatedBodySpec {
        let shape = Shape::sphere(0.1);
        let link = LinkSpec {
            name: "ball".into(),
            parent: None,
            anchor_parent: Vec3::ZERO,
            anchor_child: Vec3::ZERO,
            inertia: shape_inertia(&shape, 1.0).unwrap(),
            shape,
            collision_enabled: true,
        };
        ArticulatedBodySpec::new("ball", vec![link]).unwrap()
    }

    fn ball_traj(spec: &ArticulatedBodySpec, heights: &[f64]) -> (Trajectory, MotionSequence) {
        let frames: Vec<_> = heights
            .iter()
            .map(|&z| crate::body::JointSpaceState::with_root(Pose::from_position(Vec3::new(0.0, 0.0, z)), 0))
            .collect();
        let seq = MotionSequence::new(30.0, frames).unwrap();
        (kinematic_replay(spec, &seq, &SceneSpec::default()), seq)
    }

    #[test]
    fn sunken_sphere_depth() {
        let spec = ball_body();
        let scene = SceneSpec { static_colliders: vec![StaticCollider::floor()], objects: Vec::new() };
        let (traj, _) = ball_traj(&spec, &[-0.05, 1.0]);
        let s = penetration_stats(&traj, &scene, &spec, 64).unwrap();
        assert!((s.depth_max - 150.0).abs() < 1e-9, "{}", s.depth_max);
        // Second frame is clear, so it contributes zero to the mean.
        assert!((s.depth_mean - 75.0).abs() < 1e-9);
        // Inside when -0.05 + 0.1 z_i < 0, with z_i = 1 - 2i/63.
        let inside = (0..64).filter(|&i| 1.0 - 2.0 * i as f64 / 63.0 < 0.5).count() as f64;
        assert!((s.pene_rate - 100.0 * inside / 64.0 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn clear_body_has_no_penetration() {
        let (spec, seq) = walk();
        let scene = SceneSpec { static_colliders: vec![StaticCollider::floor()], objects: Vec::new() };
        let traj = kinematic_replay(&spec, &seq, &scene);
        let lifted = shifted(&traj, |_, _| Vec3::new(0.0, 0.0, 0.5));
        let s = penetration_stats(&lifted, &scene, &spec, 32).unwrap();
        assert_eq!(s, PenetrationStats::default());
        assert!(penetration_stats(&lifted, &scene, &spec, 8).is_err());
    }

    #[test]
    fn fall_needs_ten_frames() {
        let spec = ball_body();
        let mut heights = vec![1.0; 40];
        for h in &mut heights[5..14] {
            *h = 0.0;
        }
        let (target_traj, seq) = ball_traj(&spec, &[1.0; 40]);
        let (dip, _) = ball_traj(&spec, &heights);
        assert!(success(&dip, &seq));
        heights[14] = 0.0;
        let (fall, _) = ball_traj(&spec, &heights);
        assert!(!success(&fall, &seq));
        assert!(success(&target_traj, &seq));
    }

    #[test]
    fn free_space_run_succeeds() {
        let (spec, seq) = walk();
        let traj = run(&spec, &seq, &SceneSpec::default(), &SimConfig::default(), ControlMode::HP).unwrap();
        let report = evaluate(&traj, &seq, &spec, &SceneSpec::default(), DEFAULT_SAMPLES_PER_LINK).unwrap();
        assert!(report.success);
        assert_eq!(report.frames, seq.len());
        assert_eq!(evaluate(&traj, &seq, &spec, &SceneSpec::default(), 64).unwrap(), report);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn local_error_ignores_global_offset(x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let (spec, seq) = walk();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let noise: Vec<Vec3> = (0..seq.len() * spec.link_count())
                .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 0.02)
                .collect();
            let n = spec.link_count();
            let base = shifted(&kinematic_replay(&spec, &seq, &SceneSpec::default()), |t, i| noise[t * n + i]);
            let moved = shifted(&base, |_, _| Vec3::new(x, y, z));
            let a = mpjpe_local(&base, &seq, &spec).unwrap();
            let b = mpjpe_local(&moved, &seq, &spec).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
