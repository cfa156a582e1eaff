//! Load a scenario, simulate it, persist the trajectory and score it again.

use halfphys_core::dynamics::{kinematic_replay, run};
use halfphys_core::metrics::{evaluate, DEFAULT_SAMPLES_PER_LINK};
use halfphys_core::scenario::{load_scenario, read_trajectory_from, write_frame_obj_to, write_trajectory_to};

const MINIMAL: &str = r#"{
    "body": {"template": "humanoid22"},
    "motion": {"synth": {"kind": "walk_forward", "frames": 300}},
    "scene": {"static": [{"shape": {"type": "halfspace", "normal": [0, 0, 1], "offset": 0}}]}
}"#;

#[test]
fn three_hundred_frames_make_three_hundred_lines() {
    let s = load_scenario(MINIMAL.as_bytes()).unwrap();
    let traj = run(&s.spec, &s.sequence, &s.scene, &s.config, s.mode()).unwrap();
    let mut buf = Vec::new();
    write_trajectory_to(&traj, &mut buf).unwrap();
    let lines: Vec<&str> = std::str::from_utf8(&buf).unwrap().lines().collect();
    assert_eq!(lines.len(), 300);
    for (i, l) in lines.iter().enumerate() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["frame"], i);
    }

    let back = read_trajectory_from(buf.as_slice()).unwrap();
    let a = evaluate(&traj, &s.sequence, &s.spec, &s.scene, DEFAULT_SAMPLES_PER_LINK).unwrap();
    let b = evaluate(&back, &s.sequence, &s.spec, &s.scene, DEFAULT_SAMPLES_PER_LINK).unwrap();
    assert_eq!(a, b);
    assert!(a.mpjpe_g <= 1e-3);
    assert!(a.success);
}

#[test]
fn rest_pose_snapshot_has_one_group_per_link() {
    let s = load_scenario(MINIMAL.as_bytes()).unwrap();
    let traj = kinematic_replay(&s.spec, &s.sequence, &s.scene);
    let mut buf = Vec::new();
    write_frame_obj_to(&traj.records[0], &s.spec, &s.scene, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let links = text.lines().filter(|l| l.starts_with("g link_")).count();
    assert_eq!(links, 22);
    assert_eq!(text.lines().filter(|l| l.starts_with("g static_")).count(), 1);
}

#[test]
fn scenario_settings_reach_the_simulation() {
    let text = MINIMAL.replace(r#""scene""#, r#""config": {"substeps": 1, "lambda": 1}, "mode": "teleport", "scene""#);
    let s = load_scenario(text.as_bytes()).unwrap();
    assert_eq!(s.config.substeps, 1);
    assert_eq!(s.lambda, 1.0);
    let traj = run(&s.spec, &s.sequence, &s.scene, &s.config, s.mode()).unwrap();
    let replay = kinematic_replay(&s.spec, &s.sequence, &s.scene);
    for (a, b) in traj.records.iter().zip(&replay.records) {
        for (p, q) in a.links.iter().zip(&b.links) {
            assert!(p.position.distance(q.position) < 1e-12);
        }
    }
}
