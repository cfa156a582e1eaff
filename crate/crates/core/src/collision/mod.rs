//! Broadphase pair pruning, narrowphase contact generation and surface
//! sampling for penetration measurement.

mod geometry;
mod narrow;
mod sampling;

pub use geometry::{closest_point_on_segment, closest_point_on_triangle, closest_points_segments};
pub use narrow::{narrowphase, narrowphase_with_margin, ContactPoint};
pub use sampling::{sample_surface_points, signed_distance};

use serde::{Deserialize, Serialize};

use crate::math::{Pose, Vec3};
use crate::shape::Shape;

/// Axis-aligned bounding box. Bounds may be infinite (half-spaces).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const EVERYTHING: Aabb =
        Aabb { min: Vec3::splat(f64::NEG_INFINITY), max: Vec3::splat(f64::INFINITY) };

    pub fn new(min: Vec3, max: Vec3) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Self { min, max }
    }

    pub fn from_center(center: Vec3, half: Vec3) -> Self {
        Self { min: center - half, max: center + half }
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x <= o.max.x
            && o.min.x <= self.max.x
            && self.min.y <= o.max.y
            && o.min.y <= self.max.y
            && self.min.z <= o.max.z
            && o.min.z <= self.max.z
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (self.min.x..=self.max.x).contains(&p.x)
            && (self.min.y..=self.max.y).contains(&p.y)
            && (self.min.z..=self.max.z).contains(&p.z)
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.min(o.min), max: self.max.max(o.max) }
    }

    pub fn expanded(&self, margin: f64) -> Aabb {
        Aabb { min: self.min - Vec3::splat(margin), max: self.max + Vec3::splat(margin) }
    }
}

/// Conservative world bound of `shape` at `pose`, grown by `margin` on every side.
pub fn compute_aabb(shape: &Shape, pose: &Pose, margin: f64) -> Aabb {
    let c = pose.position;
    let bound = match shape {
        Shape::Sphere { radius } => Aabb::from_center(c, Vec3::splat(*radius)),
        Shape::Capsule { radius, half_length } => {
            let axis = pose.orientation.rotate(Vec3::Z) * *half_length;
            Aabb::from_center(c, axis.abs() + Vec3::splat(*radius))
        }
        Shape::Box { half_extents } => {
            let r = pose.orientation.to_mat3();
            let h = *half_extents;
            let ext = Vec3::new(
                r.rows[0].abs().dot(h),
                r.rows[1].abs().dot(h),
                r.rows[2].abs().dot(h),
            );
            Aabb::from_center(c, ext)
        }
        Shape::HalfSpace { normal, offset } => {
            let n = pose.transform_vector(*normal);
            let d = offset + n.dot(c);
            // Only an axis-aligned half-space has a finite face.
            let mut b = Aabb::EVERYTHING;
            for axis in 0..3 {
                let others: f64 = (0..3).filter(|&k| k != axis).map(|k| n[k].abs()).sum();
                if others < 1e-12 {
                    if n[axis] > 0.0 {
                        set_axis(&mut b.max, axis, d / n[axis]);
                    } else {
                        set_axis(&mut b.min, axis, d / n[axis]);
                    }
                }
            }
            b
        }
        Shape::TriMesh { vertices, .. } => {
            let mut b = Aabb { min: Vec3::splat(f64::INFINITY), max: Vec3::splat(f64::NEG_INFINITY) };
            for v in vertices {
                let w = pose.transform_point(*v);
                b.min = b.min.min(w);
                b.max = b.max.max(w);
            }
            b
        }
    };
    bound.expanded(margin)
}

fn set_axis(v: &mut Vec3, axis: usize, value: f64) {
    match axis {
        0 => v.x = value,
        1 => v.y = value,
        _ => v.z = value,
    }
}

/// Sweep-and-prune on x followed by a full overlap test.
///
/// Returns every overlapping index pair `(i, j)` with `i < j`, sorted.
pub fn broadphase(aabbs: &[Aabb]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..aabbs.len()).collect();
    order.sort_by(|&a, &b| aabbs[a].min.x.total_cmp(&aabbs[b].min.x).then(a.cmp(&b)));
    let mut active: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for &i in &order {
        let bi = &aabbs[i];
        active.retain(|&j| aabbs[j].max.x >= bi.min.x);
        for &j in &active {
            if aabbs[j].overlaps(bi) {
                pairs.push((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    pairs.sort_unstable();
    pairs
}

/// Identity of anything that can take part in a contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColliderId {
    Link(usize),
    Object(usize),
    Static(usize),
}

/// Contact between two colliders with combined material coefficients.
///
/// `normal` points from `body_b` toward `body_a` and `point` lies on the
/// surface of `body_a`. `separation` is the signed gap (negative when
/// overlapping); `depth` is the overlap, never negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub body_a: ColliderId,
    pub body_b: ColliderId,
    pub point: Vec3,
    pub normal: Vec3,
    pub depth: f64,
    pub separation: f64,
    pub friction: f64,
    pub restitution: f64,
}

impl Contact {
    pub fn new(a: ColliderId, b: ColliderId, cp: ContactPoint, friction: f64, restitution: f64) -> Self {
        Self {
            body_a: a,
            body_b: b,
            point: cp.point,
            normal: cp.normal,
            depth: cp.depth(),
            separation: cp.separation,
            friction,
            restitution,
        }
    }
}

pub fn combine_friction(a: f64, b: f64) -> f64 {
    a * b
}

pub fn combine_restitution(a: f64, b: f64) -> f64 {
    a.max(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Quat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_bounds() {
        let s = Shape::sphere(0.5);
        let b = compute_aabb(&s, &Pose::IDENTITY, 0.0);
        assert_eq!(b, Aabb::new(Vec3::splat(-0.5), Vec3::splat(0.5)));
        let b = compute_aabb(&s, &Pose::IDENTITY, 0.01);
        assert!((b.min - Vec3::splat(-0.51)).norm() < 1e-15 && (b.max - Vec3::splat(0.51)).norm() < 1e-15);
    }

    #[test]
    fn rotated_box_contains_corners() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let h = Vec3::new(rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0));
            let axis = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let pose = Pose::new(
                Vec3::new(rng.gen_range(-2.0..2.0), 0.3, -1.0),
                Quat::from_axis_angle(axis.normalize(), rng.gen_range(0.0..3.0)),
            );
            let b = compute_aabb(&Shape::Box { half_extents: h }, &pose, 0.0);
            let mut tight = Aabb { min: Vec3::splat(f64::INFINITY), max: Vec3::splat(f64::NEG_INFINITY) };
            for k in 0..8 {
                let c = Vec3::new(
                    if k & 1 == 0 { -h.x } else { h.x },
                    if k & 2 == 0 { -h.y } else { h.y },
                    if k & 4 == 0 { -h.z } else { h.z },
                );
                let w = pose.transform_point(c);
                assert!(b.expanded(1e-12).contains(w));
                tight.min = tight.min.min(w);
                tight.max = tight.max.max(w);
            }
            // The bound of a box is exactly the corner bound.
            assert!((tight.min - b.min).norm() < 1e-12 && (tight.max - b.max).norm() < 1e-12);
        }
    }

    #[test]
    fn floor_bound_is_one_sided() {
        let b = compute_aabb(&Shape::floor(), &Pose::IDENTITY, 0.002);
        assert_eq!(b.max.z, 0.002);
        assert_eq!(b.min.z, f64::NEG_INFINITY);
        assert_eq!(b.max.x, f64::INFINITY);
    }

    #[test]
    fn broadphase_simple_cases() {
        let a = Aabb::new(Vec3::ZERO, Vec3::splat(1.0));
        let far = Aabb::new(Vec3::splat(2.0), Vec3::splat(3.0));
        assert!(broadphase(&[a, far]).is_empty());
        let near = Aabb::new(Vec3::splat(0.5), Vec3::splat(1.5));
        assert_eq!(broadphase(&[near, a]), vec![(0, 1)]);
    }

    #[test]
    fn broadphase_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let boxes: Vec<Aabb> = (0..100)
                .map(|_| {
                    let c = Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
                    let h = Vec3::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                    Aabb::from_center(c, h)
                })
                .collect();
            let mut brute = Vec::new();
            for i in 0..boxes.len() {
                for j in i + 1..boxes.len() {
                    if boxes[i].overlaps(&boxes[j]) {
                        brute.push((i, j));
                    }
                }
            }
            assert_eq!(broadphase(&boxes), brute);
        }
    }

    #[test]
    fn material_combination() {
        assert_eq!(combine_friction(1.0, 0.1), 0.1);
        assert_eq!(combine_restitution(0.2, 0.7), 0.7);
    }
}
