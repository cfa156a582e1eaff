//! Collision and mass geometry primitives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::math::Vec3;
use crate::Error;

/// Geometry attached to a link, object or static collider, in its local frame.
///
/// Capsules are aligned with the local z axis. Half-spaces are the region
/// `normal · p <= offset` and, like triangle meshes, are only valid as static
/// colliders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Sphere {
        radius: f64,
    },
    Capsule {
        radius: f64,
        half_length: f64,
    },
    Box {
        half_extents: Vec3,
    },
    #[serde(rename = "halfspace")]
    HalfSpace {
        normal: Vec3,
        offset: f64,
    },
    #[serde(rename = "trimesh")]
    TriMesh {
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
    },
}

impl Shape {
    pub fn sphere(radius: f64) -> Self {
        Shape::Sphere { radius }
    }

    pub fn capsule(radius: f64, half_length: f64) -> Self {
        Shape::Capsule { radius, half_length }
    }

    pub fn cuboid(hx: f64, hy: f64, hz: f64) -> Self {
        Shape::Box { half_extents: Vec3::new(hx, hy, hz) }
    }

    pub fn floor() -> Self {
        Shape::HalfSpace { normal: Vec3::Z, offset: 0.0 }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Sphere { .. } => "sphere",
            Shape::Capsule { .. } => "capsule",
            Shape::Box { .. } => "box",
            Shape::HalfSpace { .. } => "halfspace",
            Shape::TriMesh { .. } => "trimesh",
        }
    }

    pub fn is_static_only(&self) -> bool {
        matches!(self, Shape::HalfSpace { .. } | Shape::TriMesh { .. })
    }

    pub fn validate(&self) -> Result<(), Error> {
        let pos = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{} {what} must be positive, got {v}", self.kind())))
            }
        };
        match self {
            Shape::Sphere { radius } => pos(*radius, "radius"),
            Shape::Capsule { radius, half_length } => {
                pos(*radius, "radius")?;
                if *half_length >= 0.0 && half_length.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!("capsule half_length must be non-negative, got {half_length}")))
                }
            }
            Shape::Box { half_extents } => {
                pos(half_extents.x, "half_extents.x")?;
                pos(half_extents.y, "half_extents.y")?;
                pos(half_extents.z, "half_extents.z")
            }
            Shape::HalfSpace { normal, offset } => {
                if (normal.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidSpec("halfspace normal must be unit length".into()));
                }
                if !offset.is_finite() {
                    return Err(Error::InvalidSpec("halfspace offset must be finite".into()));
                }
                Ok(())
            }
            Shape::TriMesh { vertices, triangles } => {
                if triangles.is_empty() {
                    return Err(Error::InvalidSpec("trimesh has no triangles".into()));
                }
                if vertices.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSpec("trimesh vertex is not finite".into()));
                }
                for t in triangles {
                    if t.iter().any(|&i| i >= vertices.len()) {
                        return Err(Error::InvalidSpec(format!("trimesh triangle {t:?} indexes a missing vertex")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Volume in m³; infinite for half-spaces, zero for meshes.
    pub fn volume(&self) -> f64 {
        match *self {
            Shape::Sphere { radius } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Capsule { radius, half_length } => {
                PI * radius * radius * 2.0 * half_length + 4.0 / 3.0 * PI * radius.powi(3)
            }
            Shape::Box { half_extents: h } => 8.0 * h.x * h.y * h.z,
            Shape::HalfSpace { .. } => f64::INFINITY,
            Shape::TriMesh { .. } => 0.0,
        }
    }

    /// Radius of a sphere about the local origin enclosing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Sphere { radius } => *radius,
            Shape::Capsule { radius, half_length } => radius + half_length,
            Shape::Box { half_extents } => half_extents.norm(),
            Shape::HalfSpace { .. } => f64::INFINITY,
            Shape::TriMesh { vertices, .. } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// Uniformly scales all lengths.
    pub fn scaled(&self, s: f64) -> Shape {
        match self {
            Shape::Sphere { radius } => Shape::Sphere { radius: radius * s },
            Shape::Capsule { radius, half_length } => Shape::Capsule { radius: radius * s, half_length: half_length * s },
            Shape::Box { half_extents } => Shape::Box { half_extents: *half_extents * s },
            Shape::HalfSpace { normal, offset } => Shape::HalfSpace { normal: *normal, offset: offset * s },
            Shape::TriMesh { vertices, triangles } => Shape::TriMesh {
                vertices: vertices.iter().map(|v| *v * s).collect(),
                triangles: triangles.clone(),
            },
        }
    }
}

impl Shape {
    /// Farthest point of a convex shape along local direction `dir`.
    ///
    /// Half-spaces and meshes return the origin; they never need a support query.
    pub fn support(&self, dir: Vec3) -> Vec3 {
        match *self {
            Shape::Sphere { radius } => dir.normalize() * radius,
            Shape::Capsule { radius, half_length } => {
                let end = if dir.z >= 0.0 { half_length } else { -half_length };
                Vec3::new(0.0, 0.0, end) + dir.normalize() * radius
            }
            Shape::Box { half_extents: h } => Vec3::new(
                h.x.copysign(dir.x),
                h.y.copysign(dir.y),
                h.z.copysign(dir.z),
            ),
            Shape::HalfSpace { .. } | Shape::TriMesh { .. } => Vec3::ZERO,
        }
    }
}
