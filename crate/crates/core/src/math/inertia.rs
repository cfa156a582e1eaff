use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Mat3, Quat, Vec3};
use crate::shape::Shape;
use crate::Error;

/// Mass properties of a rigid body in its own frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaSpec {
    /// kg
    pub mass: f64,
    /// Centre of mass in the body frame, m.
    pub com: Vec3,
    /// Diagonal of the body-frame inertia tensor about the COM, kg·m².
    pub principal: Vec3,
}

impl InertiaSpec {
    pub fn validate(&self) -> Result<(), Error> {
        let p = self.principal;
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidSpec(format!("mass must be positive, got {}", self.mass)));
        }
        if !(p.min_elem() > 0.0 && p.is_finite()) {
            return Err(Error::InvalidSpec("principal inertia must be positive".into()));
        }
        // Relative tolerance absorbs rounding in the closed-form expressions.
        let tol = 1e-12 * (p.x + p.y + p.z);
        if p.x > p.y + p.z + tol || p.y > p.x + p.z + tol || p.z > p.x + p.y + tol {
            return Err(Error::InvalidSpec("principal inertia violates triangle inequality".into()));
        }
        Ok(())
    }

    /// Inertia tensor about the COM rotated into the world frame.
    pub fn world_tensor(&self, orientation: Quat) -> Mat3 {
        let r = orientation.to_mat3();
        r.mul_mat(&Mat3::diagonal(self.principal)).mul_mat(&r.transpose())
    }

    pub fn world_inverse_tensor(&self, orientation: Quat) -> Mat3 {
        let r = orientation.to_mat3();
        let inv = Vec3::new(1.0 / self.principal.x, 1.0 / self.principal.y, 1.0 / self.principal.z);
        r.mul_mat(&Mat3::diagonal(inv)).mul_mat(&r.transpose())
    }
}

/// Closed-form inertia of a solid primitive of uniform density about its centre.
pub fn shape_inertia(shape: &Shape, mass: f64) -> Result<InertiaSpec, Error> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidSpec(format!("mass must be positive, got {mass}")));
    }
    shape.validate()?;
    let principal = match *shape {
        Shape::Sphere { radius } => Vec3::splat(0.4 * mass * radius * radius),
        Shape::Box { half_extents: h } => {
            let (a2, b2, c2) = (h.x * h.x, h.y * h.y, h.z * h.z);
            Vec3::new(b2 + c2, a2 + c2, a2 + b2) * (mass / 3.0)
        }
        Shape::Capsule { radius: r, half_length: h } => {
            let v_cyl = PI * r * r * 2.0 * h;
            let v_sph = 4.0 / 3.0 * PI * r * r * r;
            let m_cyl = mass * v_cyl / (v_cyl + v_sph);
            let m_sph = mass - m_cyl;
            let axial = m_cyl * r * r / 2.0 + m_sph * 0.4 * r * r;
            // Hemispheres: own inertia 83/320 m r² about their COM, which sits
            // h + 3r/8 from the capsule centre; the sum simplifies as below.
            let lateral = m_cyl * (r * r / 4.0 + h * h / 3.0) + m_sph * (0.4 * r * r + h * h + 0.75 * h * r);
            Vec3::new(lateral, lateral, axial)
        }
        Shape::HalfSpace { .. } | Shape::TriMesh { .. } => {
            return Err(Error::InvalidSpec("static-only shapes have no inertia".into()))
        }
    };
    Ok(InertiaSpec { mass, com: Vec3::ZERO, principal })
}
