//! Regenerates the bundled scenario files under `scenarios/` from the
//! reference fixtures.
//!
//! ```text
//! cargo run -p halfphys-core --example write_scenarios -- scenarios
//! ```

use std::path::Path;

use halfphys_core::body::BodySpecFile;
use halfphys_core::fixtures::{self, squeeze, Fixture};
use serde_json::{json, Value};

fn write(dir: &Path, name: &str, value: &Value) {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(dir.join(name), text).expect("writable output directory");
    println!("wrote {name}");
}

fn scenario(body: Value, motion: Value, f: &Fixture, extra: Value) -> Value {
    let mut v = json!({
        "body": body,
        "motion": motion,
        "scene": serde_json::to_value(&f.scene).unwrap(),
    });
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    v
}

fn humanoid() -> Value {
    json!({"template": "humanoid22"})
}

fn synth(kind: &str, frames: usize) -> Value {
    json!({"synth": {"kind": kind, "frames": frames}})
}

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "scenarios".into());
    let dir = Path::new(&dir);
    std::fs::create_dir_all(dir).expect("output directory");
    let empty = fixtures::free_space("static");

    write(dir, "free_space_sine.json", &scenario(humanoid(), synth("sine_joints", 300), &empty, json!({})));
    write(dir, "free_space_walk.json", &scenario(humanoid(), synth("walk_forward", 300), &empty, json!({})));
    write(
        dir,
        "pd_sine.json",
        &scenario(humanoid(), synth("sine_joints", 300), &empty, json!({"mode": "pd", "pd": {"kp": 200.0, "kd": 20.0}})),
    );

    let wall = fixtures::wall_walk();
    write(dir, "wall_walk.json", &scenario(humanoid(), synth("walk_forward", 300), &wall, json!({})));
    write(dir, "wall_walk_teleport.json", &scenario(humanoid(), synth("walk_forward", 300), &wall, json!({"mode": "teleport"})));
    write(dir, "sit_on_box.json", &scenario(humanoid(), synth("squat_sit", 120), &fixtures::sit_on_box(), json!({})));
    write(dir, "kick.json", &scenario(humanoid(), synth("kick", 90), &fixtures::kick(0.5), json!({})));
    write(dir, "resting_stack.json", &scenario(humanoid(), synth("static", 300), &fixtures::resting_stack(), json!({})));
    write(dir, "bystander.json", &scenario(humanoid(), synth("walk_forward", 300), &fixtures::bystander_object(), json!({})));
    write(dir, "bench.json", &scenario(humanoid(), synth("walk_forward", 300), &fixtures::bench_scene(), json!({})));

    let pillar = fixtures::arm_pillar(1.0);
    std::fs::write(dir.join("arm_raise.motion.json"), pillar.motion.to_json()).expect("writable");
    write(
        dir,
        "arm_pillar.json",
        &scenario(humanoid(), json!({"path": "arm_raise.motion.json"}), &pillar, json!({"config": {"lambda": 1.0}})),
    );

    let grip = fixtures::squeeze_lift(0.5);
    write(dir, "gripper.body.json", &serde_json::to_value(BodySpecFile::from_spec(&grip.spec)).unwrap());
    std::fs::write(dir.join("squeeze_lift.motion.json"), grip.motion.to_json()).expect("writable");
    write(
        dir,
        "squeeze_lift.json",
        &scenario(
            json!({"path": "gripper.body.json"}),
            json!({"path": "squeeze_lift.motion.json"}),
            &grip,
            json!({"config": {"lambda": squeeze::PJSC_LAMBDA}}),
        ),
    );
}
