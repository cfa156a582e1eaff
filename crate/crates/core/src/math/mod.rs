//! Vector, quaternion and rigid-transform algebra.
//!
//! Conventions used throughout the crate:
//! - angular velocities of links and objects are world-frame;
//! - joint angular velocities are expressed in the parent link frame;
//! - quaternions are stored and serialized as `(w, x, y, z)`;
//! - Z is up, units are SI.

mod inertia;
mod quat;
mod vec3;

pub use inertia::{shape_inertia, InertiaSpec};
pub use quat::{angdiff, integrate_orientation, quat_mul, slerp, Quat};
pub use vec3::{Mat3, Vec3};

use serde::{Deserialize, Serialize};

/// Rigid placement: position plus unit orientation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    #[serde(rename = "pos")]
    pub position: Vec3,
    #[serde(rename = "quat", default)]
    pub orientation: Quat,
}

impl Pose {
    pub const IDENTITY: Pose = Pose { position: Vec3::ZERO, orientation: Quat::IDENTITY };

    pub fn new(position: Vec3, orientation: Quat) -> Self {
        Self { position, orientation }
    }

    pub fn from_position(position: Vec3) -> Self {
        Self { position, orientation: Quat::IDENTITY }
    }

    /// Maps a point from the local frame into the world.
    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.position + self.orientation.rotate(p)
    }

    /// Maps a world point into the local frame.
    #[inline]
    pub fn inverse_transform_point(&self, p: Vec3) -> Vec3 {
        self.orientation.conj().rotate(p - self.position)
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.orientation.rotate(v)
    }

    #[inline]
    pub fn inverse_transform_vector(&self, v: Vec3) -> Vec3 {
        self.orientation.conj().rotate(v)
    }

    pub fn translated(&self, t: Vec3) -> Pose {
        Pose::new(self.position + t, self.orientation)
    }
}

/// Linear (m/s) and world-frame angular (rad/s) velocity of a rigid frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpatialVelocity {
    pub linear: Vec3,
    pub angular: Vec3,
}

impl SpatialVelocity {
    pub const ZERO: SpatialVelocity = SpatialVelocity { linear: Vec3::ZERO, angular: Vec3::ZERO };

    pub fn new(linear: Vec3, angular: Vec3) -> Self {
        Self { linear, angular }
    }

    /// Velocity of a world point rigidly attached to a frame at `origin`.
    #[inline]
    pub fn point_velocity(&self, origin: Vec3, point: Vec3) -> Vec3 {
        self.linear + self.angular.cross(point - origin)
    }

    pub fn is_finite(&self) -> bool {
        self.linear.is_finite() && self.angular.is_finite()
    }
}
