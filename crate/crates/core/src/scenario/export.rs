//! Wavefront OBJ snapshots of one frame.

use std::f64::consts::PI;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::SceneSpec;
use crate::body::ArticulatedBodySpec;
use crate::dynamics::FrameRecord;
use crate::math::{Pose, Vec3};
use crate::shape::Shape;
use crate::Error;

const SEGMENTS: usize = 16;
const BANDS: usize = 8;
/// Half size of the quad drawn for a half-space, m.
const PLANE_HALF: f64 = 10.0;

/// Triangle mesh in the shape's local frame; indices are zero-based.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

/// Sphere-like mesh: poles plus latitude rings. Rings in the upper
/// hemisphere are raised by `half_length`, the lower ones lowered, and for
/// capsules the equator ring is duplicated to form the cylinder.
fn round_mesh(radius: f64, half_length: f64) -> Mesh {
    let mut rings: Vec<(f64, f64)> = Vec::new(); // (ring radius, z)
    for b in 1..BANDS {
        let theta = PI * b as f64 / BANDS as f64;
        let (r, z) = (radius * theta.sin(), radius * theta.cos());
        if b == BANDS / 2 && half_length > 0.0 {
            rings.push((r, half_length));
            rings.push((r, -half_length));
        } else {
            rings.push((r, z + half_length * z.signum()));
        }
    }
    let mut m = Mesh::default();
    m.vertices.push(Vec3::new(0.0, 0.0, radius + half_length));
    for &(r, z) in &rings {
        for s in 0..SEGMENTS {
            let phi = 2.0 * PI * s as f64 / SEGMENTS as f64;
            m.vertices.push(Vec3::new(r * phi.cos(), r * phi.sin(), z));
        }
    }
    let bottom = m.vertices.len();
    m.vertices.push(Vec3::new(0.0, 0.0, -radius - half_length));
    let at = |ring: usize, s: usize| 1 + ring * SEGMENTS + s % SEGMENTS;
    for s in 0..SEGMENTS {
        m.triangles.push([0, at(0, s), at(0, s + 1)]);
    }
    for ring in 0..rings.len() - 1 {
        for s in 0..SEGMENTS {
            let (a, b, c, d) = (at(ring, s), at(ring, s + 1), at(ring + 1, s), at(ring + 1, s + 1));
            m.triangles.push([a, c, b]);
            m.triangles.push([b, c, d]);
        }
    }
    let last = rings.len() - 1;
    for s in 0..SEGMENTS {
        m.triangles.push([bottom, at(last, s + 1), at(last, s)]);
    }
    m
}

fn box_mesh(h: Vec3) -> Mesh {
    let vertices = (0..8)
        .map(|i| {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            Vec3::new(sx * h.x, sy * h.y, sz * h.z)
        })
        .collect();
    let triangles = vec![
        [0, 2, 1], [1, 2, 3], // -z
        [4, 5, 6], [5, 7, 6], // +z
        [0, 1, 4], [1, 5, 4], // -y
        [2, 6, 3], [3, 6, 7], // +y
        [0, 4, 2], [2, 4, 6], // -x
        [1, 3, 5], [3, 7, 5], // +x
    ];
    Mesh { vertices, triangles }
}

/// Tessellation of `shape` in its local frame. Half-spaces become a finite
/// square centred on the point of the plane closest to the origin.
pub fn tessellate(shape: &Shape) -> Mesh {
    match shape {
        Shape::Sphere { radius } => round_mesh(*radius, 0.0),
        Shape::Capsule { radius, half_length } => round_mesh(*radius, *half_length),
        Shape::Box { half_extents } => box_mesh(*half_extents),
        Shape::HalfSpace { normal, offset } => {
            let n = normal.normalize();
            let (u, v) = n.orthonormal_basis();
            let c = n * *offset;
            let vertices = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                .iter()
                .map(|&(a, b)| c + u * (a * PLANE_HALF) + v * (b * PLANE_HALF))
                .collect();
            Mesh { vertices, triangles: vec![[0, 1, 2], [0, 2, 3]] }
        }
        Shape::TriMesh { vertices, triangles } => Mesh { vertices: vertices.clone(), triangles: triangles.clone() },
    }
}

/// Writes every link, object and static collider of `record` as its own group
/// (`link_<name>`, `object_<name>`, `static_<name>`).
pub fn write_frame_obj_to<W: Write>(
    record: &FrameRecord,
    spec: &ArticulatedBodySpec,
    scene: &SceneSpec,
    out: W,
) -> Result<(), Error> {
    if record.links.len() != spec.link_count() {
        return Err(Error::Mismatch(format!("frame has {} links, body has {}", record.links.len(), spec.link_count())));
    }
    if record.objects.len() != scene.objects.len() {
        return Err(Error::Mismatch(format!(
            "frame has {} objects, scene has {}",
            record.objects.len(),
            scene.objects.len()
        )));
    }
    let mut out = BufWriter::new(out);
    writeln!(out, "# frame {} t={}", record.frame, record.time)?;
    let mut base = 1;
    let mut group = |out: &mut BufWriter<W>, name: String, shape: &Shape, pose: &Pose| -> std::io::Result<()> {
        let mesh = tessellate(shape);
        writeln!(out, "g {name}")?;
        for v in &mesh.vertices {
            let w = pose.transform_point(*v);
            writeln!(out, "v {} {} {}", w.x, w.y, w.z)?;
        }
        for t in &mesh.triangles {
            writeln!(out, "f {} {} {}", t[0] + base, t[1] + base, t[2] + base)?;
        }
        base += mesh.vertices.len();
        Ok(())
    };
    for (link, pose) in spec.links().iter().zip(&record.links) {
        group(&mut out, format!("link_{}", link.name), &link.shape, pose)?;
    }
    for (o, rec) in scene.objects.iter().zip(&record.objects) {
        group(&mut out, format!("object_{}", o.name), &o.shape, &rec.pose)?;
    }
    for s in &scene.static_colliders {
        group(&mut out, format!("static_{}", s.name), &s.shape, &s.pose)?;
    }
    out.flush()?;
    Ok(())
}

pub fn export_frame_obj(record: &FrameRecord, spec: &ArticulatedBodySpec, scene: &SceneSpec, path: &Path) -> Result<(), Error> {
    write_frame_obj_to(record, spec, scene, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::body::build_humanoid;
    use crate::collision::signed_distance;
    use crate::dynamics::kinematic_replay;
    use crate::fixtures;
    use crate::kinematics::{synth_motion, SynthParams};
    use crate::scenario::{RigidObjectSpec, StaticCollider};

    /// Every undirected edge used by exactly two triangles, each direction once.
    fn is_closed_manifold(m: &Mesh) -> bool {
        let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
        for t in &m.triangles {
            for k in 0..3 {
                *edges.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        edges.iter().all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
    }

    fn volume(m: &Mesh) -> f64 {
        m.triangles
            .iter()
            .map(|t| m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]])) / 6.0)
            .sum()
    }

    #[test]
    fn primitive_meshes_are_closed_and_outward() {
        for shape in [Shape::sphere(0.3), Shape::capsule(0.1, 0.25), Shape::cuboid(0.1, 0.2, 0.3)] {
            let m = tessellate(&shape);
            assert!(is_closed_manifold(&m), "{shape:?}");
            let v = volume(&m);
            assert!(v > 0.0 && v <= shape.volume() + 1e-12, "{shape:?}: {v}");
            let chi = m.vertices.len() as i64 - (3 * m.triangles.len() / 2) as i64 + m.triangles.len() as i64;
            assert_eq!(chi, 2);
        }
        assert_eq!(tessellate(&Shape::cuboid(1.0, 1.0, 1.0)).triangles.len(), 12);
        assert_eq!(tessellate(&Shape::sphere(1.0)).triangles.len(), 2 * SEGMENTS * (BANDS - 1));
    }

    fn parse(obj: &str) -> Vec<(String, Vec<Vec3>, usize)> {
        let mut groups: Vec<(String, Vec<Vec3>, usize)> = Vec::new();
        for line in obj.lines() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("g") => groups.push((it.next().unwrap().to_string(), Vec::new(), 0)),
                Some("v") => {
                    let c: Vec<f64> = it.map(|x| x.parse().unwrap()).collect();
                    groups.last_mut().unwrap().1.push(Vec3::new(c[0], c[1], c[2]));
                }
                Some("f") => groups.last_mut().unwrap().2 += 1,
                _ => {}
            }
        }
        groups
    }

    #[test]
    fn single_sphere_object_is_one_group() {
        let f = fixtures::free_space("static");
        let mut scene = SceneSpec::default();
        scene.objects.push(RigidObjectSpec::new("ball", Shape::sphere(0.2), 1.0, Pose::from_position(Vec3::new(1.0, 2.0, 3.0))));
        let traj = kinematic_replay(&f.spec, &f.motion, &scene);
        let mut buf = Vec::new();
        write_frame_obj_to(&traj.records[0], &f.spec, &scene, &mut buf).unwrap();
        let groups = parse(std::str::from_utf8(&buf).unwrap());
        let objects: Vec<_> = groups.iter().filter(|g| g.0.starts_with("object_")).collect();
        assert_eq!(objects.len(), 1);
        assert_eq!(objects[0].0, "object_ball");
        for v in &objects[0].1 {
            assert!((v.distance(Vec3::new(1.0, 2.0, 3.0)) - 0.2).abs() < 1e-9);
        }
    }

    #[test]
    fn humanoid_vertices_follow_forward_kinematics() {
        let spec = build_humanoid("humanoid22", 1.0).unwrap();
        let seq = synth_motion(&spec, &SynthParams::new("sine_joints").with_frames(12)).unwrap();
        let scene = SceneSpec { static_colliders: vec![StaticCollider::floor()], objects: Vec::new() };
        let traj = kinematic_replay(&spec, &seq, &scene);
        let rec = &traj.records[11];
        let mut buf = Vec::new();
        write_frame_obj_to(rec, &spec, &scene, &mut buf).unwrap();
        let groups = parse(std::str::from_utf8(&buf).unwrap());
        let links: Vec<_> = groups.iter().filter(|g| g.0.starts_with("link_")).collect();
        assert_eq!(links.len(), 22);
        assert!(groups.iter().any(|g| g.0 == "static_floor" && g.2 == 2));
        let poses = crate::body::forward_kinematics(&spec, &seq.frames()[11]);
        for ((g, link), pose) in links.iter().zip(spec.links()).zip(&poses) {
            assert_eq!(g.0, format!("link_{}", link.name));
            for v in &g.1 {
                assert!(signed_distance(&link.shape, pose, *v).abs() < 1e-6, "{}", link.name);
            }
            let centroid = g.1.iter().fold(Vec3::ZERO, |a, &v| a + v) * (1.0 / g.1.len() as f64);
            assert!(centroid.distance(pose.position) < 1e-6, "{}", link.name);
        }
    }

    #[test]
    fn mismatched_frame_is_rejected() {
        let f = fixtures::kick(0.5);
        let traj = kinematic_replay(&f.spec, &f.motion, &f.scene);
        let err = write_frame_obj_to(&traj.records[0], &f.spec, &SceneSpec::default(), Vec::new());
        assert!(matches!(err, Err(Error::Mismatch(_))));
    }
}
