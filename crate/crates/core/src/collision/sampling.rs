//! Surface samples (a vertex stand-in for primitive bodies) and point
//! signed distances.

use std::f64::consts::PI;

use super::geometry::{closest_point_on_segment, closest_point_on_triangle};
use super::narrow::box_sdf;
use crate::math::{Pose, Vec3};
use crate::shape::Shape;

/// 2π(1 − 1/φ)
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Fibonacci lattice with both poles included (for `n >= 2`).
fn fibonacci_sphere(n: usize) -> impl Iterator<Item = Vec3> {
    let span = n.saturating_sub(1).max(1) as f64;
    (0..n).map(move |i| {
        let z = if n == 1 { 1.0 } else { 1.0 - 2.0 * i as f64 / span };
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = i as f64 * GOLDEN_ANGLE;
        Vec3::new(r * phi.cos(), r * phi.sin(), z)
    })
}

/// Deterministic quasi-uniform points on the surface of `shape`, local frame.
///
/// Spheres use a Fibonacci lattice; capsules split `n` between a golden-angle
/// spiral on the cylinder and a Fibonacci lattice over the two caps in
/// proportion to area; boxes place a cell-centred grid on each face. Box
/// counts are rounded per face, so the total is close to but not always
/// exactly `n`. Static-only shapes have no samples.
pub fn sample_surface_points(shape: &Shape, n: usize) -> Vec<Vec3> {
    match *shape {
        Shape::Sphere { radius } => fibonacci_sphere(n).map(|p| p * radius).collect(),
        Shape::Capsule { radius, half_length } => {
            let side = 4.0 * PI * radius * half_length;
            let caps = 4.0 * PI * radius * radius;
            let n_side = ((n as f64) * side / (side + caps)).round() as usize;
            let mut pts: Vec<Vec3> = (0..n_side)
                .map(|k| {
                    let z = -half_length + 2.0 * half_length * (k as f64 + 0.5) / n_side as f64;
                    let phi = k as f64 * GOLDEN_ANGLE;
                    Vec3::new(radius * phi.cos(), radius * phi.sin(), z)
                })
                .collect();
            pts.extend(fibonacci_sphere(n - n_side).map(|p| {
                let shift = if p.z >= 0.0 { half_length } else { -half_length };
                p * radius + Vec3::new(0.0, 0.0, shift)
            }));
            pts
        }
        Shape::Box { half_extents: h } => {
            let faces = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
            let area = |(_, u, v): (usize, usize, usize)| 4.0 * h[u] * h[v];
            let total: f64 = faces.iter().map(|&f| 2.0 * area(f)).sum();
            let mut pts = Vec::with_capacity(n + 8);
            for f @ (k, u, v) in faces {
                let m = (n as f64 * area(f) / total).max(1.0);
                let cols = ((m * h[u] / h[v]).sqrt().round() as usize).max(1);
                let rows = ((m / cols as f64).round() as usize).max(1);
                for s in [1.0, -1.0] {
                    for i in 0..cols {
                        for j in 0..rows {
                            let a = -h[u] + 2.0 * h[u] * (i as f64 + 0.5) / cols as f64;
                            let b = -h[v] + 2.0 * h[v] * (j as f64 + 0.5) / rows as f64;
                            let mut p = [0.0; 3];
                            p[k] = s * h[k];
                            p[u] = a;
                            p[v] = b;
                            pts.push(Vec3::from(p));
                        }
                    }
                }
            }
            pts
        }
        Shape::HalfSpace { .. } | Shape::TriMesh { .. } => Vec::new(),
    }
}

/// Signed distance from world point `p` to `shape` at `pose`; negative inside.
///
/// Triangle meshes take the sign from the face normal of the closest
/// triangle, so they should be consistently wound (outward, counter-clockwise).
pub fn signed_distance(shape: &Shape, pose: &Pose, p: Vec3) -> f64 {
    match shape {
        Shape::Sphere { radius } => p.distance(pose.position) - radius,
        Shape::Capsule { radius, half_length } => {
            let q = pose.inverse_transform_point(p);
            let (c, _) = closest_point_on_segment(q, Vec3::new(0.0, 0.0, -half_length), Vec3::new(0.0, 0.0, *half_length));
            q.distance(c) - radius
        }
        Shape::Box { half_extents } => box_sdf(*half_extents, pose.inverse_transform_point(p)).0,
        Shape::HalfSpace { normal, offset } => normal.dot(pose.inverse_transform_point(p)) - offset,
        Shape::TriMesh { vertices, triangles } => {
            let q = pose.inverse_transform_point(p);
            let mut best: (f64, f64) = (f64::INFINITY, 0.0);
            for t in triangles {
                let [a, b, c] = t.map(|i| vertices[i]);
                let cp = closest_point_on_triangle(q, a, b, c);
                let d = q.distance(cp);
                let n = (b - a).cross(c - a).normalize();
                let facing = if d > 0.0 { (q - cp).dot(n) / d } else { 0.0 };
                // Among equidistant triangles prefer the one facing the point.
                if d < best.0 - 1e-12 || ((d - best.0).abs() <= 1e-12 && facing.abs() > best.1.abs()) {
                    best = (d, facing);
                }
            }
            if best.1 < 0.0 {
                -best.0
            } else {
                best.0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Quat;

    #[test]
    fn sphere_samples_on_surface() {
        for n in [4, 17, 100] {
            let pts = sample_surface_points(&Shape::sphere(1.0), n);
            assert_eq!(pts.len(), n);
            assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn box_samples_on_faces() {
        let h = Vec3::new(0.3, 0.1, 0.05);
        let pts = sample_surface_points(&Shape::Box { half_extents: h }, 200);
        assert!(pts.len() >= 150 && pts.len() <= 260);
        for p in &pts {
            let on_face = (0..3).any(|k| (p[k].abs() - h[k]).abs() < 1e-12);
            let inside = (0..3).all(|k| p[k].abs() <= h[k] + 1e-12);
            assert!(on_face && inside);
        }
    }

    #[test]
    fn capsule_spacing_is_even() {
        let shape = Shape::capsule(0.05, 0.16);
        let pts = sample_surface_points(&shape, 1000);
        assert_eq!(pts.len(), 1000);
        for p in &pts {
            assert!(signed_distance(&shape, &Pose::IDENTITY, *p).abs() < 1e-12);
        }
        let nn: Vec<f64> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                pts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| p.distance(*q)).fold(f64::INFINITY, f64::min)
            })
            .collect();
        let mean = nn.iter().sum::<f64>() / nn.len() as f64;
        let var = nn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / nn.len() as f64;
        assert!(var.sqrt() / mean < 0.5, "cv = {}", var.sqrt() / mean);
    }

    #[test]
    fn signed_distances() {
        let pose = Pose::new(Vec3::new(1.0, 0.0, 0.0), Quat::from_axis_angle(Vec3::Z, 0.4));
        assert!((signed_distance(&Shape::sphere(0.5), &pose, Vec3::new(1.0, 0.0, 0.2)) + 0.3).abs() < 1e-12);
        assert!((signed_distance(&Shape::floor(), &Pose::IDENTITY, Vec3::new(3.0, 1.0, -0.15)) + 0.15).abs() < 1e-15);
        let b = Shape::cuboid(0.5, 0.5, 0.5);
        assert!((signed_distance(&b, &Pose::IDENTITY, Vec3::new(0.0, 0.0, 0.7)) - 0.2).abs() < 1e-12);
        assert!((signed_distance(&b, &Pose::IDENTITY, Vec3::new(0.0, 0.45, 0.0)) + 0.05).abs() < 1e-12);
        // A closed tetrahedron wound outward.
        let tet = Shape::TriMesh {
            vertices: vec![Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z],
            triangles: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        };
        assert!(signed_distance(&tet, &Pose::IDENTITY, Vec3::splat(0.1)) < 0.0);
        assert!((signed_distance(&tet, &Pose::IDENTITY, Vec3::new(0.2, 0.2, -0.3)) - 0.3).abs() < 1e-12);
    }
}
