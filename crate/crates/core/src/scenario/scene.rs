use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::math::{shape_inertia, InertiaSpec, Pose, SpatialVelocity};
use crate::shape::Shape;
use crate::Error;

/// Immovable collider (floor, walls, furniture).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticCollider {
    #[serde(default)]
    pub name: String,
    pub shape: Shape,
    #[serde(default)]
    pub pose: Pose,
    #[serde(default = "default_static_friction")]
    pub friction: f64,
}

fn default_static_friction() -> f64 {
    1.0
}

fn default_object_friction() -> f64 {
    0.5
}

impl StaticCollider {
    pub fn new(name: impl Into<String>, shape: Shape, pose: Pose) -> Self {
        Self { name: name.into(), shape, pose, friction: default_static_friction() }
    }

    pub fn floor() -> Self {
        Self::new("floor", Shape::floor(), Pose::IDENTITY)
    }
}

/// Free rigid body driven by gravity and contacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidObjectSpec {
    pub name: String,
    pub shape: Shape,
    /// kg
    pub mass: f64,
    #[serde(default = "default_object_friction")]
    pub friction: f64,
    #[serde(default)]
    pub restitution: f64,
    #[serde(alias = "initial_pose")]
    pub pose: Pose,
    #[serde(default, alias = "initial_velocity")]
    pub velocity: SpatialVelocity,
}

impl RigidObjectSpec {
    pub fn new(name: impl Into<String>, shape: Shape, mass: f64, pose: Pose) -> Self {
        Self {
            name: name.into(),
            shape,
            mass,
            friction: default_object_friction(),
            restitution: 0.0,
            pose,
            velocity: SpatialVelocity::ZERO,
        }
    }

    pub fn inertia(&self) -> Result<InertiaSpec, Error> {
        shape_inertia(&self.shape, self.mass)
    }
}

/// Static scene plus dynamic objects.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default, rename = "static")]
    pub static_colliders: Vec<StaticCollider>,
    #[serde(default)]
    pub objects: Vec<RigidObjectSpec>,
}

fn check_pose(pose: &mut Pose, path: impl Fn() -> String) -> Result<(), Error> {
    let n = pose.orientation.norm();
    if !pose.position.is_finite() || !n.is_finite() || (n - 1.0).abs() > 1e-3 {
        return Err(Error::schema(path(), "pose must be finite with a unit quaternion"));
    }
    pose.orientation = pose.orientation.normalize();
    Ok(())
}

impl SceneSpec {
    /// Checks value ranges, normalizes quaternions and names unnamed statics.
    /// Error paths are relative to the scene (`objects[0].mass`).
    pub fn validate(&mut self) -> Result<(), Error> {
        let mut names = HashSet::new();
        for (i, s) in self.static_colliders.iter_mut().enumerate() {
            let path = |f: &str| format!("static[{i}].{f}");
            if s.name.is_empty() {
                s.name = format!("static{i}");
            }
            s.shape.validate().map_err(|e| Error::schema(path("shape"), e.to_string()))?;
            if !(s.friction >= 0.0 && s.friction.is_finite()) {
                return Err(Error::schema(path("friction"), format!("must be non-negative, got {}", s.friction)));
            }
            check_pose(&mut s.pose, || path("pose"))?;
            if !names.insert(s.name.clone()) {
                return Err(Error::schema(path("name"), format!("duplicate name `{}`", s.name)));
            }
        }
        for (i, o) in self.objects.iter_mut().enumerate() {
            let path = |f: &str| format!("objects[{i}].{f}");
            if !(o.mass > 0.0 && o.mass.is_finite()) {
                return Err(Error::schema(path("mass"), format!("must be positive, got {}", o.mass)));
            }
            o.shape.validate().map_err(|e| Error::schema(path("shape"), e.to_string()))?;
            if o.shape.is_static_only() {
                return Err(Error::schema(path("shape"), format!("{} is only allowed for static colliders", o.shape.kind())));
            }
            if !(o.friction >= 0.0 && o.friction.is_finite()) {
                return Err(Error::schema(path("friction"), format!("must be non-negative, got {}", o.friction)));
            }
            if !(0.0..=1.0).contains(&o.restitution) {
                return Err(Error::schema(path("restitution"), format!("must be in [0, 1], got {}", o.restitution)));
            }
            check_pose(&mut o.pose, || path("pose"))?;
            if !o.velocity.is_finite() {
                return Err(Error::schema(path("velocity"), "must be finite"));
            }
            if !names.insert(o.name.clone()) {
                return Err(Error::schema(path("name"), format!("duplicate name `{}`", o.name)));
            }
        }
        Ok(())
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }
}
