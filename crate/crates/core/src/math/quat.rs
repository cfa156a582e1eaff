use std::ops::Mul;

use serde::{Deserialize, Serialize};

use super::{Mat3, Vec3};

/// Unit quaternion stored as `(w, x, y, z)`. Serialized as `[w, x, y, z]`.
///
/// Rotation vectors produced by [`Quat::log`] and consumed by [`Quat::exp`]
/// are `axis * angle`. When a quaternion is left-multiplied onto an
/// orientation (`exp(r) * q`), `r` is expressed in the frame `q` maps into,
/// which for link orientations is the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for Quat {
    fn default() -> Self {
        Quat::IDENTITY
    }
}

impl From<[f64; 4]> for Quat {
    fn from(a: [f64; 4]) -> Self {
        Quat::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quat> for [f64; 4] {
    fn from(q: Quat) -> Self {
        q.to_array()
    }
}

impl Quat {
    pub const IDENTITY: Quat = Quat::new(1.0, 0.0, 0.0, 0.0);

    /// Raw constructor; does not normalize.
    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    #[inline]
    pub fn vector(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let a = axis.normalize();
        let (s, c) = (0.5 * angle).sin_cos();
        Quat::new(c, a.x * s, a.y * s, a.z * s)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalize(self) -> Quat {
        let n = self.norm();
        if n > 1e-300 && n.is_finite() {
            Quat::new(self.w / n, self.x / n, self.y / n, self.z / n)
        } else {
            Quat::IDENTITY
        }
    }

    #[inline]
    pub fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn conj(self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product without renormalization.
    #[inline]
    pub fn mul_raw(self, b: Quat) -> Quat {
        let a = self;
        Quat::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }

    /// Sign representative with `w >= 0` (same rotation).
    pub fn canonical(self) -> Quat {
        if self.w < 0.0 {
            self.neg()
        } else {
            self
        }
    }

    /// Returns `self` or `-self`, whichever lies in the hemisphere of `reference`.
    pub fn aligned_with(self, reference: Quat) -> Quat {
        if self.dot(reference) < 0.0 {
            self.neg()
        } else {
            self
        }
    }

    #[inline]
    pub fn rotate(self, v: Vec3) -> Vec3 {
        // v + 2w(u x v) + 2 u x (u x v)
        let u = self.vector();
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    pub fn to_mat3(self) -> Mat3 {
        let Quat { w, x, y, z } = self;
        Mat3::from_rows(
            Vec3::new(1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)),
            Vec3::new(2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)),
            Vec3::new(2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)),
        )
    }

    /// Exponential map: rotation vector (axis * angle) to unit quaternion.
    pub fn exp(r: Vec3) -> Quat {
        let theta = r.norm();
        let half = 0.5 * theta;
        let k = if theta < 1e-6 {
            // sin(h)/theta = 0.5 - theta^2/48 + ...
            0.5 - theta * theta / 48.0
        } else {
            half.sin() / theta
        };
        Quat::new(half.cos(), r.x * k, r.y * k, r.z * k).normalize()
    }

    /// Logarithm map onto the shortest-path rotation vector, angle in `[0, pi]`.
    ///
    /// `q` and `-q` give the same result. At exactly pi the axis is taken from
    /// the vector part as stored, which keeps the output deterministic.
    pub fn log(self) -> Vec3 {
        let q = self.canonical();
        let v = q.vector();
        let s = v.norm();
        if s < 1e-9 {
            // 2 atan2(s, w) / s ~= (2 / w)(1 - s^2 / (3 w^2))
            let w = q.w.max(1e-300);
            v * (2.0 / w) * (1.0 - s * s / (3.0 * w * w))
        } else {
            v * (2.0 * s.atan2(q.w) / s)
        }
    }

    /// Rotation angle of this quaternion, in `[0, pi]`.
    pub fn angle(self) -> f64 {
        let q = self.canonical();
        2.0 * q.vector().norm().atan2(q.w)
    }

    /// Angular distance between two rotations, in `[0, pi]`.
    pub fn angle_to(self, other: Quat) -> f64 {
        other.mul_raw(self.conj()).angle()
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Mul for Quat {
    type Output = Quat;

    /// Hamilton product, renormalized.
    fn mul(self, b: Quat) -> Quat {
        self.mul_raw(b).normalize()
    }
}

/// Hamilton product `a ⊗ b`, renormalized.
pub fn quat_mul(a: Quat, b: Quat) -> Quat {
    a * b
}

/// Spherical linear interpolation along the shortest arc.
///
/// `q1` is negated when `dot(q0, q1) < 0`. Inputs that are nearly orthogonal in
/// 4D (`|dot| < 1e-6`, a half-turn apart) have two equally short arcs; the one
/// given by `q1` as stored is used, so the result is deterministic.
pub fn slerp(q0: Quat, q1: Quat, u: f64) -> Quat {
    if u <= 0.0 {
        return q0;
    }
    let q1 = if q0.dot(q1) < 0.0 && q0.dot(q1).abs() >= 1e-6 { q1.neg() } else { q1 };
    if u >= 1.0 {
        return q1;
    }
    let rel = q1.mul_raw(q0.conj());
    // log of the un-canonicalized relative rotation keeps the chosen branch.
    let v = rel.vector();
    let s = v.norm();
    let r = if s < 1e-12 {
        Vec3::ZERO
    } else {
        v * (2.0 * s.atan2(rel.w) / s)
    };
    Quat::exp(r * u) * q0
}

/// World-frame angular velocity carrying `q_current` onto `q_target` in `dt`
/// seconds along the shortest path: `log(q_target ⊗ q_current⁻¹) / dt`.
pub fn angdiff(q_target: Quat, q_current: Quat, dt: f64) -> Vec3 {
    q_target.mul_raw(q_current.conj()).log() / dt
}

/// Integrates a constant angular velocity exactly: `exp(omega * h) ⊗ q`.
pub fn integrate_orientation(q: Quat, omega: Vec3, h: f64) -> Quat {
    if h == 0.0 || omega == Vec3::ZERO {
        return q;
    }
    Quat::exp(omega * h) * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close_rot(a: Quat, b: Quat, tol: f64) -> bool {
        a.angle_to(b) <= tol
    }

    #[test]
    fn mul_identity_and_inverse() {
        let q = Quat::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7);
        assert!(close_rot(quat_mul(Quat::IDENTITY, q), q, 1e-12));
        let id = quat_mul(q, q.conj());
        assert!((id.w.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mul_quarter_turns_matches_matrix_product() {
        let qz = Quat::from_axis_angle(Vec3::Z, FRAC_PI_2);
        let m = qz.to_mat3().mul_mat(&qz.to_mat3());
        let q = qz * qz;
        let expected = Quat::from_axis_angle(Vec3::Z, PI);
        assert!(close_rot(q, expected, 1e-12));
        let mq = q.to_mat3();
        for r in 0..3 {
            assert!((mq.rows[r] - m.rows[r]).norm() < 1e-12);
        }
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let q0 = Quat::IDENTITY;
        let q1 = Quat::from_axis_angle(Vec3::Z, FRAC_PI_2);
        assert_eq!(slerp(q0, q1, 0.0), q0);
        assert!(close_rot(slerp(q0, q1, 1.0), q1, 1e-12));
        let mid = slerp(q0, q1, 0.5);
        assert!(close_rot(mid, Quat::from_axis_angle(Vec3::Z, FRAC_PI_4), 1e-12));
    }

    #[test]
    fn slerp_half_turn_is_deterministic() {
        let q0 = Quat::IDENTITY;
        let q1 = Quat::new(0.0, 0.0, 0.0, 1.0);
        let a = slerp(q0, q1, 0.5);
        let b = slerp(q0, q1, 0.5);
        assert_eq!(a, b);
        assert!((a.angle() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn angdiff_cases() {
        let q = Quat::from_axis_angle(Vec3::new(0.3, -1.0, 0.2), 1.1);
        assert!(angdiff(q, q, 0.1).norm() < 1e-12);
        assert!(angdiff(q.neg(), q, 0.1).norm() < 1e-12);
        let w = angdiff(Quat::from_axis_angle(Vec3::Z, FRAC_PI_2), Quat::IDENTITY, 0.1);
        assert!((w - Vec3::new(0.0, 0.0, 15.707_963_267_948_966)).norm() < 1e-9);
    }

    #[test]
    fn integrate_cases() {
        let q = Quat::from_axis_angle(Vec3::X, 0.4);
        assert_eq!(integrate_orientation(q, Vec3::ZERO, 0.3), q);
        let r = integrate_orientation(Quat::IDENTITY, Vec3::new(0.0, 0.0, PI), 0.5);
        assert!(close_rot(r, Quat::from_axis_angle(Vec3::Z, FRAC_PI_2), 1e-12));
    }

    #[test]
    fn log_exp_small_angles() {
        let r = Vec3::new(1e-10, -2e-10, 3e-11);
        let back = Quat::exp(r).log();
        assert!((back - r).norm() < 1e-20);
    }

    #[test]
    fn rotate_matches_matrix() {
        let q = Quat::from_axis_angle(Vec3::new(1.0, 1.0, 0.0), 0.9);
        let v = Vec3::new(0.2, -0.5, 1.3);
        assert!((q.rotate(v) - q.to_mat3().mul_vec(v)).norm() < 1e-14);
    }
}
