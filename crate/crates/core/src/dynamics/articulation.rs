//! The human articulation in reduced coordinates.
//!
//! Generalized velocity layout: `[v_root (3, world), w_root (3, world),
//! w_joint_0 (3, parent frame), ...]`. Positions are integrated exactly in
//! joint space, so the joint anchors never separate.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::body::{forward_kinematics, forward_velocity, joint_positions, ArticulatedBodySpec, JointSpaceState};
use crate::math::{integrate_orientation, Mat3, Pose, SpatialVelocity, Vec3};

#[derive(Debug, Clone)]
pub(crate) struct Articulation {
    pub spec: ArticulatedBodySpec,
    /// Joint indices from the root down to each link (inclusive of the link's own joint).
    ancestors: Vec<Vec<usize>>,
}

/// Configuration-dependent quantities for one substep.
#[derive(Debug, Clone)]
pub(crate) struct Kinematics {
    pub poses: Vec<Pose>,
    pub pivots: Vec<Vec3>,
}

impl Articulation {
    pub fn new(spec: ArticulatedBodySpec) -> Self {
        let mut ancestors: Vec<Vec<usize>> = Vec::with_capacity(spec.link_count());
        ancestors.push(Vec::new());
        for i in 1..spec.link_count() {
            let mut chain = ancestors[spec.parent(i).unwrap_or(0)].clone();
            chain.push(i - 1);
            ancestors.push(chain);
        }
        Self { spec, ancestors }
    }

    pub fn dof(&self) -> usize {
        6 + 3 * self.spec.joint_count()
    }

    pub fn kinematics(&self, js: &JointSpaceState) -> Kinematics {
        let poses = forward_kinematics(&self.spec, js);
        let pivots = joint_positions(&self.spec, &poses);
        Kinematics { poses, pivots }
    }

    pub fn pack(root: SpatialVelocity, joint_omegas: &[Vec3]) -> Vec<f64> {
        let mut u = Vec::with_capacity(6 + 3 * joint_omegas.len());
        u.extend_from_slice(&root.linear.to_array());
        u.extend_from_slice(&root.angular.to_array());
        for w in joint_omegas {
            u.extend_from_slice(&w.to_array());
        }
        u
    }

    pub fn root_velocity(u: &[f64]) -> SpatialVelocity {
        SpatialVelocity::new(vec_at(u, 0), vec_at(u, 3))
    }

    pub fn joint_omegas(u: &[f64]) -> Vec<Vec3> {
        (6..u.len()).step_by(3).map(|k| vec_at(u, k)).collect()
    }

    pub fn link_velocities(&self, kin: &Kinematics, u: &[f64]) -> Vec<SpatialVelocity> {
        forward_velocity(&self.spec, &kin.poses, Self::root_velocity(u), &Self::joint_omegas(u))
    }

    /// Row `out` such that `out · u` is the velocity of world point `p`
    /// (rigidly attached to `link`) along `d`.
    pub fn point_jacobian(&self, kin: &Kinematics, link: usize, p: Vec3, d: Vec3, out: &mut [f64]) {
        out.fill(0.0);
        put(out, 0, d);
        put(out, 3, (p - kin.poses[0].position).cross(d));
        for &j in &self.ancestors[link] {
            let parent = self.spec.parent(j + 1).unwrap_or(0);
            let r = p - kin.pivots[j];
            put(out, 6 + 3 * j, kin.poses[parent].inverse_transform_vector(r.cross(d)));
        }
    }

    /// Generalized force of a world force `f` applied at the centre of mass
    /// of every link, weighted by link mass (used for gravity).
    pub fn gravity_force(&self, kin: &Kinematics, g: Vec3) -> Vec<f64> {
        let mut q = vec![0.0; self.dof()];
        let mut row = vec![0.0; self.dof()];
        for (i, l) in self.spec.links().iter().enumerate() {
            let c = kin.poses[i].transform_point(l.inertia.com);
            let f = g * l.inertia.mass;
            let mag = f.norm();
            if mag == 0.0 {
                continue;
            }
            self.point_jacobian(kin, i, c, f / mag, &mut row);
            for (qk, rk) in q.iter_mut().zip(&row) {
                *qk += rk * mag;
            }
        }
        q
    }

    /// Joint-space mass matrix `sum_i J_iᵀ diag(m_i, I_i) J_i`.
    pub fn mass_matrix(&self, kin: &Kinematics) -> DMatrix<f64> {
        let n = self.dof();
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut blocks: Vec<(usize, Mat3, Mat3)> = Vec::new();
        for (i, link) in self.spec.links().iter().enumerate() {
            let mass = link.inertia.mass;
            let inertia = link.inertia.world_tensor(kin.poses[i].orientation);
            let c = kin.poses[i].transform_point(link.inertia.com);
            blocks.clear();
            blocks.push((0, Mat3::IDENTITY, Mat3::ZERO));
            blocks.push((3, Mat3::skew(c - kin.poses[0].position).scale(-1.0), Mat3::IDENTITY));
            for &j in &self.ancestors[i] {
                let parent = self.spec.parent(j + 1).unwrap_or(0);
                let r = kin.poses[parent].orientation.to_mat3();
                let a = Mat3::skew(c - kin.pivots[j]).scale(-1.0).mul_mat(&r);
                blocks.push((6 + 3 * j, a, r));
            }
            for (p, ap, bp) in &blocks {
                let apt = ap.transpose().scale(mass);
                let bpt = bp.transpose().mul_mat(&inertia);
                for (q, aq, bq) in &blocks {
                    if q < p {
                        continue;
                    }
                    let blk = apt.mul_mat(aq).add(&bpt.mul_mat(bq));
                    for r in 0..3 {
                        for s in 0..3 {
                            let v = blk.rows[r][s];
                            m[(p + r, q + s)] += v;
                            if p != q {
                                m[(q + s, p + r)] += v;
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// Advances `js` by `h` seconds at constant generalized velocity `u`.
    pub fn integrate(js: &mut JointSpaceState, u: &[f64], h: f64) {
        js.root.position += vec_at(u, 0) * h;
        js.root.orientation = integrate_orientation(js.root.orientation, vec_at(u, 3), h);
        for (j, q) in js.joints.iter_mut().enumerate() {
            *q = integrate_orientation(*q, vec_at(u, 6 + 3 * j), h);
        }
    }
}

pub(crate) fn vec_at(u: &[f64], k: usize) -> Vec3 {
    Vec3::new(u[k], u[k + 1], u[k + 2])
}

pub(crate) fn put(u: &mut [f64], k: usize, v: Vec3) {
    u[k] = v.x;
    u[k + 1] = v.y;
    u[k + 2] = v.z;
}

/// Factorized mass matrix, optionally with the root block held fixed
/// (infinite root inertia).
pub(crate) struct MassSolver {
    chol: Cholesky<f64, Dyn>,
    offset: usize,
    n: usize,
}

impl MassSolver {
    pub fn new(m: &DMatrix<f64>, fixed_root: bool) -> Option<Self> {
        let n = m.nrows();
        let offset = if fixed_root { 6 } else { 0 };
        let sub = m.view((offset, offset), (n - offset, n - offset)).into_owned();
        Some(Self { chol: Cholesky::new(sub)?, offset, n })
    }

    /// `M⁻¹ x` with zeros in fixed coordinates.
    pub fn solve(&self, x: &[f64]) -> Vec<f64> {
        let rhs = DVector::from_column_slice(&x[self.offset..]);
        let sol = self.chol.solve(&rhs);
        let mut out = vec![0.0; self.n];
        out[self.offset..].copy_from_slice(sol.as_slice());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::build_humanoid;
    use crate::math::Quat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_setup(seed: u64) -> (Articulation, JointSpaceState, Vec<f64>) {
        let art = Articulation::new(build_humanoid("humanoid22", 1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut js = JointSpaceState::rest(art.spec.joint_count());
        for q in js.joints.iter_mut() {
            *q = Quat::from_axis_angle(Vec3::new(rng.gen(), rng.gen(), rng.gen::<f64>() - 0.5).normalize(), rng.gen_range(0.0..1.0));
        }
        js.root.orientation = Quat::from_axis_angle(Vec3::new(0.3, -0.2, 1.0).normalize(), 0.8);
        js.root.position = Vec3::new(0.1, 0.4, 1.0);
        let u = (0..art.dof()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (art, js, u)
    }

    #[test]
    fn kinetic_energy_matches_link_sum() {
        let (art, js, u) = random_setup(9);
        let kin = art.kinematics(&js);
        let m = art.mass_matrix(&kin);
        let uv = DVector::from_column_slice(&u);
        let quad = 0.5 * uv.dot(&(&m * &uv));
        let vels = art.link_velocities(&kin, &u);
        let mut oracle = 0.0;
        for (i, l) in art.spec.links().iter().enumerate() {
            let c = kin.poses[i].transform_point(l.inertia.com);
            let v = vels[i].point_velocity(kin.poses[i].position, c);
            let w = vels[i].angular;
            let iw = l.inertia.world_tensor(kin.poses[i].orientation).mul_vec(w);
            oracle += 0.5 * l.inertia.mass * v.dot(v) + 0.5 * w.dot(iw);
        }
        assert!((quad - oracle).abs() < 1e-9 * oracle.max(1.0), "{quad} vs {oracle}");
    }

    #[test]
    fn point_jacobian_matches_link_velocity() {
        let (art, js, u) = random_setup(10);
        let kin = art.kinematics(&js);
        let vels = art.link_velocities(&kin, &u);
        let mut row = vec![0.0; art.dof()];
        for link in [0, 5, 13, 21] {
            let p = kin.poses[link].transform_point(Vec3::new(0.03, -0.02, 0.05));
            for d in [Vec3::X, Vec3::Y, Vec3::Z] {
                art.point_jacobian(&kin, link, p, d, &mut row);
                let jv: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum();
                let oracle = vels[link].point_velocity(kin.poses[link].position, p).dot(d);
                assert!((jv - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn integration_matches_exact_joint_motion() {
        let (art, js, u) = random_setup(11);
        let mut a = js.clone();
        Articulation::integrate(&mut a, &u, 0.01);
        for (j, q) in a.joints.iter().enumerate() {
            let expect = Quat::exp(vec_at(&u, 6 + 3 * j) * 0.01) * js.joints[j];
            assert!(q.angle_to(expect) < 1e-14);
        }
        assert_eq!(art.dof(), 69);
    }

    #[test]
    fn mass_solver_fixed_root() {
        let (art, js, _) = random_setup(12);
        let m = art.mass_matrix(&art.kinematics(&js));
        let x: Vec<f64> = (0..art.dof()).map(|k| (k as f64).sin()).collect();
        let full = MassSolver::new(&m, false).unwrap().solve(&x);
        let back = &m * DVector::from_column_slice(&full);
        for k in 0..art.dof() {
            assert!((back[k] - x[k]).abs() < 1e-8);
        }
        let fixed = MassSolver::new(&m, true).unwrap().solve(&x);
        assert!(fixed[..6].iter().all(|&v| v == 0.0));
    }
}
