//! Projected Gauss–Seidel over contact rows (normal + two friction rows per
//! contact). Rows couple the human's generalized velocity and object
//! velocities; static colliders are immovable.

use super::articulation::{Articulation, Kinematics, MassSolver};
use crate::collision::{ColliderId, Contact};
use crate::math::{Mat3, SpatialVelocity, Vec3};

/// Impulses applied at one contact. The impulse on `body_b` is exactly the
/// negation of the impulse on `body_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactImpulse {
    pub contact: Contact,
    /// Normal impulse, N·s (non-negative).
    pub normal: f64,
    /// Friction impulses along the contact tangent basis, N·s.
    pub tangent: [f64; 2],
    /// World-frame impulse on `body_a`, N·s.
    pub impulse: Vec3,
}

impl ContactImpulse {
    pub fn on_a(&self) -> Vec3 {
        self.impulse
    }

    pub fn on_b(&self) -> Vec3 {
        -self.impulse
    }
}

/// Solver-side mass data for one free object.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ObjectMass {
    pub inv_mass: f64,
    pub inv_inertia: Mat3,
    pub com: Vec3,
}

pub(crate) struct HumanCtx<'a> {
    pub art: &'a Articulation,
    pub kin: &'a Kinematics,
    /// `None` when the human is kinematic (infinite mass).
    pub mass: Option<&'a MassSolver>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolverParams {
    pub h: f64,
    pub iterations: usize,
    pub beta: f64,
    pub skin: f64,
    pub restitution_threshold: f64,
    pub max_push_speed: f64,
}

struct ObjTerm {
    idx: usize,
    j_lin: Vec3,
    j_ang: Vec3,
    w_lin: Vec3,
    w_ang: Vec3,
}

struct Row {
    human: Option<(Vec<f64>, Option<Vec<f64>>)>,
    objs: Vec<ObjTerm>,
    inv_k: f64,
    target: f64,
    lambda: f64,
}

struct Side {
    id: ColliderId,
    sign: f64,
}

impl Row {
    fn velocity(&self, u: &[f64], objv: &[SpatialVelocity]) -> f64 {
        let mut jv = 0.0;
        if let Some((j, _)) = &self.human {
            jv += j.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        }
        for o in &self.objs {
            jv += o.j_lin.dot(objv[o.idx].linear) + o.j_ang.dot(objv[o.idx].angular);
        }
        jv
    }

    fn apply(&self, d: f64, u: &mut [f64], objv: &mut [SpatialVelocity]) {
        if let Some((_, Some(w))) = &self.human {
            for (uk, wk) in u.iter_mut().zip(w) {
                *uk += wk * d;
            }
        }
        for o in &self.objs {
            objv[o.idx].linear += o.w_lin * d;
            objv[o.idx].angular += o.w_ang * d;
        }
    }
}

fn build_row(
    sides: [&Side; 2],
    p: Vec3,
    d: Vec3,
    human: Option<&HumanCtx>,
    objects: &[ObjectMass],
) -> Row {
    let mut row = Row { human: None, objs: Vec::new(), inv_k: 0.0, target: 0.0, lambda: 0.0 };
    let mut k = 0.0;
    for s in sides {
        let dir = d * s.sign;
        match s.id {
            ColliderId::Link(link) => {
                let Some(ctx) = human else { continue };
                let mut j = vec![0.0; ctx.art.dof()];
                ctx.art.point_jacobian(ctx.kin, link, p, dir, &mut j);
                let w = ctx.mass.map(|m| m.solve(&j));
                if let Some(w) = &w {
                    k += j.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
                }
                row.human = Some((j, w));
            }
            ColliderId::Object(idx) => {
                let m = &objects[idx];
                let j_ang = (p - m.com).cross(dir);
                let w_lin = dir * m.inv_mass;
                let w_ang = m.inv_inertia.mul_vec(j_ang);
                k += dir.dot(w_lin) + j_ang.dot(w_ang);
                row.objs.push(ObjTerm { idx, j_lin: dir, j_ang, w_lin, w_ang });
            }
            ColliderId::Static(_) => {}
        }
    }
    if k > 1e-14 {
        row.inv_k = 1.0 / k;
    }
    row
}

/// Previous impulses seed a new contact when they join the same two bodies
/// within this distance (m) and with nearly the same normal.
const WARM_RADIUS: f64 = 0.01;
const WARM_MIN_COS: f64 = 0.9;

fn warm_match<'a>(c: &Contact, warm: &'a [ContactImpulse]) -> Option<&'a ContactImpulse> {
    warm.iter()
        .filter(|w| {
            w.contact.body_a == c.body_a
                && w.contact.body_b == c.body_b
                && w.contact.normal.dot(c.normal) > WARM_MIN_COS
                && w.contact.point.distance(c.point) < WARM_RADIUS
        })
        .min_by(|x, y| x.contact.point.distance(c.point).total_cmp(&y.contact.point.distance(c.point)))
}

/// Solves all contacts in order and returns the accumulated impulses.
///
/// `warm` holds the impulses of the previous solve; matching contacts start
/// from them instead of zero, which lets resting stacks converge within the
/// iteration budget.
pub(crate) fn solve_contacts(
    contacts: &[Contact],
    warm: &[ContactImpulse],
    human: Option<&HumanCtx>,
    objects: &[ObjectMass],
    params: &SolverParams,
    u: &mut [f64],
    objv: &mut [SpatialVelocity],
) -> Vec<ContactImpulse> {
    let h = params.h;
    let mut rows: Vec<Row> = Vec::with_capacity(3 * contacts.len());
    let mut bases = Vec::with_capacity(contacts.len());
    for c in contacts {
        let a = Side { id: c.body_a, sign: 1.0 };
        let b = Side { id: c.body_b, sign: -1.0 };
        // Both bodies are pushed at the midpoint of the overlap.
        let p = c.point - c.normal * (0.5 * c.separation);
        let (t1, t2) = c.normal.orthonormal_basis();
        let mut normal = build_row([&a, &b], p, c.normal, human, objects);
        let vn = normal.velocity(u, objv);
        let sep = c.separation;
        let mut target = if sep > params.skin {
            -(sep - params.skin) / h
        } else {
            (params.beta * (params.skin - sep) / h).min(params.max_push_speed)
        };
        if c.restitution > 0.0 && vn < -params.restitution_threshold && sep + vn * h < params.skin {
            target = target.max(-c.restitution * vn);
        }
        normal.target = target;
        rows.push(normal);
        rows.push(build_row([&a, &b], p, t1, human, objects));
        rows.push(build_row([&a, &b], p, t2, human, objects));
        bases.push((t1, t2));

        if let Some(w) = warm_match(c, warm) {
            let base = rows.len() - 3;
            let n = w.impulse.dot(c.normal).max(0.0);
            let limit = c.friction * n;
            let start = [n, w.impulse.dot(t1).clamp(-limit, limit), w.impulse.dot(t2).clamp(-limit, limit)];
            for (r, &l) in start.iter().enumerate() {
                let row = &mut rows[base + r];
                if row.inv_k > 0.0 && l != 0.0 {
                    row.lambda = l;
                    row.apply(l, u, objv);
                }
            }
        }
    }

    for _ in 0..params.iterations {
        for (ci, c) in contacts.iter().enumerate() {
            let base = 3 * ci;
            {
                let row = &mut rows[base];
                if row.inv_k > 0.0 {
                    let jv = row.velocity(u, objv);
                    let new = (row.lambda + (row.target - jv) * row.inv_k).max(0.0);
                    let d = new - row.lambda;
                    row.lambda = new;
                    row.apply(d, u, objv);
                }
            }
            let limit = c.friction * rows[base].lambda;
            for r in 1..3 {
                let row = &mut rows[base + r];
                if row.inv_k > 0.0 {
                    let jv = row.velocity(u, objv);
                    let new = (row.lambda - jv * row.inv_k).clamp(-limit, limit);
                    let d = new - row.lambda;
                    row.lambda = new;
                    row.apply(d, u, objv);
                }
            }
        }
    }

    contacts
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let (t1, t2) = bases[ci];
            let (n, f1, f2) = (rows[3 * ci].lambda, rows[3 * ci + 1].lambda, rows[3 * ci + 2].lambda);
            ContactImpulse { contact: *c, normal: n, tangent: [f1, f2], impulse: c.normal * n + t1 * f1 + t2 * f2 }
        })
        .collect()
}
