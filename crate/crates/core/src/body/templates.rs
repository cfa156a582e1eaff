use crate::math::{shape_inertia, Vec3};
use crate::shape::Shape;
use crate::Error;

use super::{ArticulatedBodySpec, LinkSpec};

pub const TEMPLATES: [&str; 3] = ["humanoid22", "humanoid55", "chain3"];

/// Base mass of the humanoid templates at scale 1, kg.
pub const HUMANOID_MASS: f64 = 70.0;

struct Row {
    name: String,
    parent: Option<String>,
    anchor_parent: Vec3,
    anchor_child: Vec3,
    shape: Shape,
    /// Fraction of total mass (normalized after the table is built).
    share: f64,
}

fn row(name: &str, parent: Option<&str>, ap: [f64; 3], ac: [f64; 3], shape: Shape, share: f64) -> Row {
    Row {
        name: name.to_string(),
        parent: parent.map(str::to_string),
        anchor_parent: ap.into(),
        anchor_child: ac.into(),
        shape,
        share,
    }
}

/// Builds one of the named body templates, uniformly scaled.
///
/// Lengths scale with `scale` and masses with `scale³`. The humanoids face +x
/// with z up, arms hanging at the sides, and use anthropometric segment mass
/// fractions of a 70 kg adult. All humanoid joints are ball joints.
pub fn build_humanoid(template: &str, scale: f64) -> Result<ArticulatedBodySpec, Error> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidSpec(format!("scale must be positive, got {scale}")));
    }
    let (rows, base_mass) = match template {
        "humanoid22" => (humanoid22_rows(), HUMANOID_MASS),
        "humanoid55" => (humanoid55_rows(), HUMANOID_MASS),
        "chain3" => (chain3_rows(), 3.0),
        other => return Err(Error::UnknownTemplate(other.to_string())),
    };
    let share_sum: f64 = rows.iter().map(|r| r.share).sum();
    let total = base_mass * scale.powi(3);
    let names: Vec<String> = rows.iter().map(|r| r.name.clone()).collect();
    let mut links = Vec::with_capacity(rows.len());
    for r in rows {
        let parent = match &r.parent {
            None => None,
            Some(p) => Some(
                names
                    .iter()
                    .position(|n| n == p)
                    .ok_or_else(|| Error::InvalidSpec(format!("template parent {p} missing")))?,
            ),
        };
        let shape = r.shape.scaled(scale);
        let mass = total * r.share / share_sum;
        links.push(LinkSpec {
            inertia: shape_inertia(&shape, mass)?,
            name: r.name,
            parent,
            anchor_parent: r.anchor_parent * scale,
            anchor_child: r.anchor_child * scale,
            shape,
            collision_enabled: true,
        });
    }
    ArticulatedBodySpec::new(template, links)
}

fn chain3_rows() -> Vec<Row> {
    let seg = || Shape::capsule(0.05, 0.2);
    vec![
        row("link0", None, [0.0; 3], [0.0; 3], seg(), 1.0),
        row("link1", Some("link0"), [0.0, 0.0, -0.25], [0.0, 0.0, 0.25], seg(), 1.0),
        row("link2", Some("link1"), [0.0, 0.0, -0.25], [0.0, 0.0, 0.25], seg(), 1.0),
    ]
}

fn humanoid22_rows() -> Vec<Row> {
    let mut rows = vec![
        row("pelvis", None, [0.0; 3], [0.0; 3], Shape::cuboid(0.09, 0.14, 0.07), 0.142),
        row("spine1", Some("pelvis"), [0.0, 0.0, 0.07], [0.0, 0.0, -0.06], Shape::capsule(0.095, 0.01), 0.139),
        row("spine2", Some("spine1"), [0.0, 0.0, 0.06], [0.0, 0.0, -0.06], Shape::capsule(0.10, 0.01), 0.108),
        row("spine3", Some("spine2"), [0.0, 0.0, 0.06], [0.0, 0.0, -0.075], Shape::capsule(0.105, 0.02), 0.098),
        row("neck", Some("spine3"), [0.0, 0.0, 0.075], [0.0, 0.0, -0.05], Shape::capsule(0.045, 0.01), 0.012),
        row("head", Some("neck"), [0.0, 0.0, 0.05], [0.0, 0.0, -0.1], Shape::sphere(0.1), 0.069),
    ];
    for (side, s) in [("l", 1.0), ("r", -1.0)] {
        let clav = format!("{side}_clavicle");
        let upper = format!("{side}_upper_arm");
        let fore = format!("{side}_forearm");
        rows.push(row(&clav, Some("spine3"), [0.0, 0.04 * s, 0.05], [0.0, -0.07 * s, 0.0], Shape::cuboid(0.03, 0.07, 0.03), 0.005));
        rows.push(row(&upper, Some(&clav), [0.0, 0.07 * s, 0.0], [0.0, 0.0, 0.14], Shape::capsule(0.045, 0.095), 0.028));
        rows.push(row(&fore, Some(&upper), [0.0, 0.0, -0.14], [0.0, 0.0, 0.125], Shape::capsule(0.04, 0.085), 0.016));
        rows.push(row(&format!("{side}_hand"), Some(&fore), [0.0, 0.0, -0.125], [0.0, 0.0, 0.08], Shape::cuboid(0.045, 0.02, 0.08), 0.006));
    }
    for (side, s) in [("l", 1.0), ("r", -1.0)] {
        let thigh = format!("{side}_thigh");
        let shin = format!("{side}_shin");
        let foot = format!("{side}_foot");
        rows.push(row(&thigh, Some("pelvis"), [0.0, 0.09 * s, -0.05], [0.0, 0.0, 0.21], Shape::capsule(0.07, 0.14), 0.100));
        rows.push(row(&shin, Some(&thigh), [0.0, 0.0, -0.21], [0.0, 0.0, 0.21], Shape::capsule(0.05, 0.16), 0.0465));
        rows.push(row(&foot, Some(&shin), [0.0, 0.0, -0.21], [-0.04, 0.0, 0.035], Shape::cuboid(0.09, 0.045, 0.035), 0.0115));
        rows.push(row(&format!("{side}_toes"), Some(&foot), [0.09, 0.0, -0.015], [-0.03, 0.0, 0.0], Shape::cuboid(0.03, 0.045, 0.02), 0.003));
    }
    rows
}

/// humanoid22 plus jaw, eyes and three phalanges for each of five fingers
/// per hand: 55 links, 54 joints.
fn humanoid55_rows() -> Vec<Row> {
    let mut rows = humanoid22_rows();
    for r in rows.iter_mut() {
        match r.name.as_str() {
            "head" => r.share = 0.064,
            "l_hand" | "r_hand" => r.share = 0.003,
            _ => {}
        }
    }
    rows.push(row("jaw", Some("head"), [0.05, 0.0, -0.04], [-0.03, 0.0, 0.0], Shape::cuboid(0.03, 0.04, 0.015), 0.004));
    rows.push(row("l_eye", Some("head"), [0.085, 0.035, 0.02], [0.0; 3], Shape::sphere(0.012), 0.0005));
    rows.push(row("r_eye", Some("head"), [0.085, -0.035, 0.02], [0.0; 3], Shape::sphere(0.012), 0.0005));
    let lengths = [0.03, 0.025, 0.02];
    for side in ["l", "r"] {
        let hand = format!("{side}_hand");
        for (f, x) in ["thumb", "index", "middle", "ring", "pinky"].iter().zip([0.036, 0.018, 0.0, -0.018, -0.036]) {
            let mut parent = hand.clone();
            let mut anchor = [x, 0.0, -0.08];
            for (k, len) in lengths.iter().enumerate() {
                let name = format!("{side}_{f}{}", k + 1);
                let r = 0.008;
                rows.push(row(&name, Some(&parent), anchor, [0.0, 0.0, len / 2.0], Shape::capsule(r, (len / 2.0 - r).max(0.002)), 0.0002));
                parent = name;
                anchor = [0.0, 0.0, -len / 2.0];
            }
        }
    }
    rows
}
