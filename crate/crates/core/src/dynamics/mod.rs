//! The half-physics stepper.
//!
//! Each motion frame the human's velocities are overwritten with the values
//! that carry it onto the next kinematic target, then the frame interval is
//! split into substeps. Per substep objects receive gravity, optional joint
//! forces act on the human (PJSC, damping, PD), contacts are generated and
//! solved, and positions are integrated. Contacts are the only thing that
//! pulls the human off its targets.
//!
//! The human is simulated in reduced coordinates (root twist plus one
//! angular velocity per ball joint), which keeps every joint attached
//! exactly; see [`articulation`] for the layout.

pub(crate) mod articulation;
mod solver;

use serde::{Deserialize, Serialize};

use self::articulation::{Articulation, Kinematics, MassSolver};
use self::solver::{solve_contacts, HumanCtx, ObjectMass, SolverParams};
use crate::body::{ArticulatedBodySpec, JointSpaceState, LinkSpaceState};
use crate::collision::{
    broadphase, combine_friction, combine_restitution, compute_aabb, narrowphase_with_margin, Aabb, ColliderId,
    Contact,
};
use crate::kinematics::{frame_velocities_with, FrameVelocities, MotionSequence, VelocityOptions};
use crate::math::{integrate_orientation, InertiaSpec, Pose, Quat, SpatialVelocity, Vec3};
use crate::scenario::{RigidObjectSpec, SceneSpec};
use crate::shape::Shape;
use crate::Error;

pub use self::solver::ContactImpulse;

/// How the human is driven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlMode {
    /// Enforced velocities plus optional passive joint stiffness
    /// compensation with gain `pjsc_lambda`.
    HalfPhysics { pjsc_lambda: f64 },
    /// Root velocity enforced, joints driven by PD torques toward the
    /// frame targets. Gains in N·m/rad and N·m·s/rad.
    TorquePD { kp: f64, kd: f64 },
    /// Human placed on each frame's target with zero velocity; only objects
    /// are simulated.
    PositionTeleport,
}

impl ControlMode {
    pub const HP: ControlMode = ControlMode::HalfPhysics { pjsc_lambda: 0.0 };

    pub fn validate(&self) -> Result<(), Error> {
        let ok = match *self {
            ControlMode::HalfPhysics { pjsc_lambda } => pjsc_lambda >= 0.0 && pjsc_lambda.is_finite(),
            ControlMode::TorquePD { kp, kd } => kp >= 0.0 && kd >= 0.0 && kp.is_finite() && kd.is_finite(),
            ControlMode::PositionTeleport => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("control gains must be non-negative: {self:?}")))
        }
    }
}

/// Stepper settings. Lengths in m, times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// m/s²
    pub gravity: Vec3,
    pub substeps: usize,
    pub solver_iterations: usize,
    /// Contact generation distance; penetrations up to this depth are tolerated.
    pub slop: f64,
    pub baumgarte_beta: f64,
    /// N·m·s/rad
    pub joint_damping: f64,
    /// Apply gravity to the human as well as objects.
    pub human_gravity: bool,
    /// Gap the solver keeps between resting bodies.
    pub contact_skin: f64,
    /// Approach speed (m/s) below which restitution is ignored.
    pub restitution_threshold: f64,
    /// Cap on the separation speed used to resolve overlap, m/s.
    pub max_push_speed: f64,
    /// Friction coefficient of humanoid links.
    pub body_friction: f64,
    pub velocity: VelocityOptions,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            gravity: Vec3::new(0.0, 0.0, -9.81),
            substeps: 8,
            solver_iterations: 16,
            slop: 0.002,
            baumgarte_beta: 0.2,
            joint_damping: 0.0,
            human_gravity: false,
            contact_skin: 0.0005,
            restitution_threshold: 0.05,
            max_push_speed: 2.0,
            body_friction: 1.0,
            velocity: VelocityOptions::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |f: &str, why: &str| Err(Error::schema(f, why));
        if !self.gravity.is_finite() {
            return bad("gravity", "must be finite");
        }
        if self.substeps == 0 {
            return bad("substeps", "must be at least 1");
        }
        if self.solver_iterations == 0 {
            return bad("solver_iterations", "must be at least 1");
        }
        if !(self.slop >= 0.0 && self.slop.is_finite()) {
            return bad("slop", "must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.baumgarte_beta) {
            return bad("baumgarte_beta", "must be in [0, 1]");
        }
        if !(self.joint_damping >= 0.0 && self.joint_damping.is_finite()) {
            return bad("joint_damping", "must be non-negative");
        }
        if !(self.contact_skin >= 0.0 && self.contact_skin <= self.slop) {
            return bad("contact_skin", "must be in [0, slop]");
        }
        if !(self.restitution_threshold >= 0.0) {
            return bad("restitution_threshold", "must be non-negative");
        }
        if !(self.max_push_speed > 0.0) {
            return bad("max_push_speed", "must be positive");
        }
        if !(self.body_friction >= 0.0 && self.body_friction.is_finite()) {
            return bad("body_friction", "must be non-negative");
        }
        if matches!(self.velocity.max_angular_speed, Some(w) if !(w > 0.0)) {
            return bad("velocity.max_angular_speed", "must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidObjectState {
    pub pose: Pose,
    pub velocity: SpatialVelocity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub links: LinkSpaceState,
    pub joint_state: JointSpaceState,
    pub objects: Vec<RigidObjectState>,
    pub time: f64,
    pub frame: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectRecord {
    pub name: String,
    pub pose: Pose,
    pub velocity: SpatialVelocity,
}

/// One trajectory line: the recovered human state and all object states.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: usize,
    pub time: f64,
    pub root: Pose,
    pub joints: Vec<Quat>,
    pub links: Vec<Pose>,
    pub objects: Vec<ObjectRecord>,
}

/// Per-frame solver statistics (not persisted).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameDiagnostics {
    /// Contacts in the last substep.
    pub contacts: usize,
    /// Contacts involving a humanoid link, summed over substeps.
    pub human_contacts: usize,
    /// Contacts between a humanoid link and an object, summed over substeps.
    pub object_contacts: usize,
    /// Largest overlap among the last substep's contacts, m.
    pub max_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub records: Vec<FrameRecord>,
    pub diagnostics: Vec<FrameDiagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Position of object `name` in every frame.
    pub fn object_path(&self, name: &str) -> Option<Vec<Vec3>> {
        self.records
            .iter()
            .map(|r| r.objects.iter().find(|o| o.name == name).map(|o| o.pose.position))
            .collect()
    }
}

/// Joint pose the joint would have reached after `k` collision-free
/// substeps of length `d_eta`.
pub fn expected_joint_pose(q_hat_t: Quat, omega_joint: Vec3, k: usize, d_eta: f64) -> Quat {
    integrate_orientation(q_hat_t, omega_joint, k as f64 * d_eta)
}

/// Restorative torque rotating `q_actual` toward `q_expected`, expressed in
/// the frame the two rotations are given in. Units of `lambda` are N·m/rad.
pub fn pjsc_torque(lambda: f64, q_actual: Quat, q_expected: Quat) -> Vec3 {
    if lambda == 0.0 {
        return Vec3::ZERO;
    }
    (q_expected * q_actual.conj()).log() * lambda
}

/// Link velocities for the given enforced frame velocities.
pub fn enforce_frame_velocities(spec: &ArticulatedBodySpec, poses: &[Pose], fv: &FrameVelocities) -> Vec<SpatialVelocity> {
    crate::body::forward_velocity(spec, poses, SpatialVelocity::new(fv.root_linear, fv.root_angular), &fv.joint_omegas)
}

fn object_mass(inertia: &InertiaSpec, state: &RigidObjectState) -> ObjectMass {
    ObjectMass {
        inv_mass: 1.0 / inertia.mass,
        inv_inertia: inertia.world_inverse_tensor(state.pose.orientation),
        com: state.pose.transform_point(inertia.com),
    }
}

/// One sequential-impulse solve over contacts between objects and static
/// colliders, for use outside the full stepper. Humanoid links are treated
/// as immovable. Velocities in `states` are updated in place.
pub fn solve_constraints(
    objects: &[RigidObjectSpec],
    states: &mut [RigidObjectState],
    contacts: &[Contact],
    dt_sub: f64,
    config: &SimConfig,
) -> Result<Vec<ContactImpulse>, Error> {
    if objects.len() != states.len() {
        return Err(Error::Mismatch(format!("{} objects, {} states", objects.len(), states.len())));
    }
    let masses: Vec<ObjectMass> = objects
        .iter()
        .zip(states.iter())
        .map(|(o, s)| Ok(object_mass(&o.inertia()?, s)))
        .collect::<Result<_, Error>>()?;
    let mut vels: Vec<SpatialVelocity> = states.iter().map(|s| s.velocity).collect();
    let impulses = solve_contacts(contacts, &[], None, &masses, &solver_params(config, dt_sub), &mut [], &mut vels);
    for (s, v) in states.iter_mut().zip(vels) {
        s.velocity = v;
    }
    Ok(impulses)
}

fn solver_params(config: &SimConfig, h: f64) -> SolverParams {
    SolverParams {
        h,
        iterations: config.solver_iterations,
        beta: config.baumgarte_beta,
        skin: config.contact_skin,
        restitution_threshold: config.restitution_threshold,
        max_push_speed: config.max_push_speed,
    }
}

/// Velocity-driven simulation of one human in one scene.
#[derive(Debug, Clone)]
pub struct Simulator {
    art: Articulation,
    scene: SceneSpec,
    config: SimConfig,
    mode: ControlMode,
    inertias: Vec<InertiaSpec>,
    colliding_links: Vec<usize>,
    static_aabbs: Vec<Aabb>,
    js: JointSpaceState,
    u: Vec<f64>,
    objects: Vec<RigidObjectState>,
    time: f64,
    frame: usize,
    last_impulses: Vec<ContactImpulse>,
}

struct FrameTargets {
    q_hat: Vec<Quat>,
    omegas: Vec<Vec3>,
    pd_target: Vec<Quat>,
}

impl Simulator {
    pub fn new(
        spec: ArticulatedBodySpec,
        scene: &SceneSpec,
        config: SimConfig,
        mode: ControlMode,
        initial: &JointSpaceState,
    ) -> Result<Self, Error> {
        config.validate()?;
        mode.validate()?;
        let mut scene = scene.clone();
        scene.validate()?;
        if initial.joints.len() != spec.joint_count() {
            return Err(Error::Mismatch(format!(
                "initial state has {} joints, body has {}",
                initial.joints.len(),
                spec.joint_count()
            )));
        }
        let inertias = scene.objects.iter().map(|o| o.inertia()).collect::<Result<Vec<_>, _>>()?;
        let colliding_links = (0..spec.link_count()).filter(|&i| spec.links()[i].collision_enabled).collect();
        let static_aabbs = scene.static_colliders.iter().map(|s| compute_aabb(&s.shape, &s.pose, config.slop)).collect();
        let objects = scene.objects.iter().map(|o| RigidObjectState { pose: o.pose, velocity: o.velocity }).collect();
        let art = Articulation::new(spec);
        let u = vec![0.0; art.dof()];
        Ok(Self {
            art,
            scene,
            config,
            mode,
            inertias,
            colliding_links,
            static_aabbs,
            js: initial.clone(),
            u,
            objects,
            time: 0.0,
            frame: 0,
            last_impulses: Vec::new(),
        })
    }

    pub fn spec(&self) -> &ArticulatedBodySpec {
        &self.art.spec
    }

    pub fn scene(&self) -> &SceneSpec {
        &self.scene
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn joint_state(&self) -> &JointSpaceState {
        &self.js
    }

    pub fn objects(&self) -> &[RigidObjectState] {
        &self.objects
    }

    /// Contact impulses of the most recent substep.
    pub fn last_impulses(&self) -> &[ContactImpulse] {
        &self.last_impulses
    }

    pub fn state(&self) -> SimState {
        let kin = self.art.kinematics(&self.js);
        let velocities = self.art.link_velocities(&kin, &self.u);
        SimState {
            links: LinkSpaceState { poses: kin.poses, velocities },
            joint_state: self.js.clone(),
            objects: self.objects.clone(),
            time: self.time,
            frame: self.frame,
        }
    }

    pub fn record(&self) -> FrameRecord {
        FrameRecord {
            frame: self.frame,
            time: self.time,
            root: self.js.root,
            joints: self.js.joints.clone(),
            links: self.art.kinematics(&self.js).poses,
            objects: self
                .scene
                .objects
                .iter()
                .zip(&self.objects)
                .map(|(spec, s)| ObjectRecord { name: spec.name.clone(), pose: s.pose, velocity: s.velocity })
                .collect(),
        }
    }

    /// Advances one motion frame toward target `t` of `seq`.
    pub fn step_frame(&mut self, seq: &MotionSequence, t: usize) -> Result<FrameDiagnostics, Error> {
        if seq.joint_count() != self.art.spec.joint_count() {
            return Err(Error::Mismatch(format!(
                "motion has {} joints, body has {}",
                seq.joint_count(),
                self.art.spec.joint_count()
            )));
        }
        let fv = frame_velocities_with(seq, t, &self.js, &self.config.velocity)?;
        let target = seq.frame(t)?;
        let targets = match self.mode {
            ControlMode::HalfPhysics { .. } => {
                self.u = Articulation::pack(SpatialVelocity::new(fv.root_linear, fv.root_angular), &fv.joint_omegas);
                FrameTargets { q_hat: self.js.joints.clone(), omegas: fv.joint_omegas, pd_target: Vec::new() }
            }
            ControlMode::TorquePD { .. } => {
                articulation::put(&mut self.u, 0, fv.root_linear);
                articulation::put(&mut self.u, 3, fv.root_angular);
                FrameTargets { q_hat: Vec::new(), omegas: Vec::new(), pd_target: target.joints.clone() }
            }
            ControlMode::PositionTeleport => {
                self.js = target.clone();
                self.u.fill(0.0);
                FrameTargets { q_hat: Vec::new(), omegas: Vec::new(), pd_target: Vec::new() }
            }
        };
        let h = seq.dt() / self.config.substeps as f64;
        let mut diag = FrameDiagnostics::default();
        for k in 0..self.config.substeps {
            self.substep(k, h, &targets, &mut diag)?;
        }
        self.time += seq.dt();
        self.frame = t;
        self.check_finite()?;
        Ok(diag)
    }

    fn check_finite(&self) -> Result<(), Error> {
        let human_ok = self.u.iter().all(|v| v.is_finite())
            && self.js.root.position.is_finite()
            && self.js.joints.iter().all(|q| q.is_finite());
        if !human_ok {
            return Err(Error::Diverged { frame: self.frame, detail: "non-finite human state".into() });
        }
        for (o, spec) in self.objects.iter().zip(&self.scene.objects) {
            if !(o.pose.position.is_finite() && o.pose.orientation.is_finite() && o.velocity.is_finite()) {
                return Err(Error::Diverged { frame: self.frame, detail: format!("non-finite state for `{}`", spec.name) });
            }
        }
        Ok(())
    }

    fn substep(&mut self, k: usize, h: f64, targets: &FrameTargets, diag: &mut FrameDiagnostics) -> Result<(), Error> {
        let human_dynamic = !matches!(self.mode, ControlMode::PositionTeleport);
        let fixed_root = matches!(self.mode, ControlMode::TorquePD { .. });
        let kin = self.art.kinematics(&self.js);
        let mut mass_matrix = None;

        for o in &mut self.objects {
            o.velocity.linear += self.config.gravity * h;
        }

        if human_dynamic {
            self.apply_joint_forces(k, h, &kin, targets, &mut mass_matrix, fixed_root);
        }

        let contacts = self.collide(&kin, h)?;
        diag.contacts = contacts.len();
        diag.max_depth = contacts.iter().map(|c| c.depth).fold(0.0, f64::max);
        let human_contacts = contacts.iter().filter(|c| matches!(c.body_a, ColliderId::Link(_))).count();
        diag.human_contacts += human_contacts;
        diag.object_contacts += contacts
            .iter()
            .filter(|c| matches!((c.body_a, c.body_b), (ColliderId::Link(_), ColliderId::Object(_))))
            .count();

        let mut solver = None;
        let warm = std::mem::take(&mut self.last_impulses);
        self.last_impulses = self.solve(&kin, &contacts, &warm, &mut solver, &mut mass_matrix, fixed_root, h)?;

        // Impulses can move a body further than the reach its contacts were
        // generated with. Re-collide with the solved velocities and, if that
        // finds anything new, solve again on top of the first pass.
        if !contacts.is_empty() {
            let again = self.collide(&kin, h)?;
            let key = |c: &Contact| (c.body_a, c.body_b);
            if again.len() != contacts.len() || again.iter().zip(&contacts).any(|(a, b)| key(a) != key(b)) {
                let more = self.solve(&kin, &again, &[], &mut solver, &mut mass_matrix, fixed_root, h)?;
                self.last_impulses.extend(more);
            }
        }

        for o in &mut self.objects {
            let v = o.velocity;
            o.pose.position += v.linear * h;
            o.pose.orientation = integrate_orientation(o.pose.orientation, v.angular, h);
        }
        if human_dynamic {
            Articulation::integrate(&mut self.js, &self.u, h);
        }
        Ok(())
    }

    /// One contact solve; updates the human's and objects' velocities.
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &mut self,
        kin: &Kinematics,
        contacts: &[Contact],
        warm: &[ContactImpulse],
        solver: &mut Option<MassSolver>,
        mass_matrix: &mut Option<nalgebra::DMatrix<f64>>,
        fixed_root: bool,
        h: f64,
    ) -> Result<Vec<ContactImpulse>, Error> {
        let human_dynamic = !matches!(self.mode, ControlMode::PositionTeleport);
        if solver.is_none() && human_dynamic && contacts.iter().any(|c| matches!(c.body_a, ColliderId::Link(_))) {
            let m = mass_matrix.get_or_insert_with(|| self.art.mass_matrix(kin));
            *solver = Some(self.factor(m, fixed_root)?);
        }
        let masses: Vec<ObjectMass> = self.inertias.iter().zip(&self.objects).map(|(i, s)| object_mass(i, s)).collect();
        let mut vels: Vec<SpatialVelocity> = self.objects.iter().map(|o| o.velocity).collect();
        let ctx = HumanCtx { art: &self.art, kin, mass: solver.as_ref() };
        let impulses = solve_contacts(contacts, warm, Some(&ctx), &masses, &solver_params(&self.config, h), &mut self.u, &mut vels);
        for (o, v) in self.objects.iter_mut().zip(vels) {
            o.velocity = v;
        }
        Ok(impulses)
    }

    fn factor(&self, m: &nalgebra::DMatrix<f64>, fixed_root: bool) -> Result<MassSolver, Error> {
        MassSolver::new(m, fixed_root)
            .ok_or_else(|| Error::Diverged { frame: self.frame, detail: "mass matrix is not positive definite".into() })
    }

    /// PJSC, gravity, damping and PD forces on the human's generalized velocity.
    ///
    /// PJSC, damping and PD are integrated implicitly; the PJSC spring is
    /// evaluated at the end of the substep against the expected pose `k + 1`.
    fn apply_joint_forces(
        &mut self,
        k: usize,
        h: f64,
        kin: &Kinematics,
        targets: &FrameTargets,
        mass_matrix: &mut Option<nalgebra::DMatrix<f64>>,
        fixed_root: bool,
    ) {
        let n = self.art.dof();
        let nj = self.art.spec.joint_count();

        // Per-joint stiffness and the pose error it pulls toward.
        let mut stiffness = 0.0;
        let mut errs: Vec<Vec3> = Vec::new();
        match self.mode {
            ControlMode::HalfPhysics { pjsc_lambda } if pjsc_lambda > 0.0 => {
                let mut max_residual: f64 = 0.0;
                for (j, (&q_hat, &w)) in targets.q_hat.iter().zip(&targets.omegas).enumerate() {
                    let e = (expected_joint_pose(q_hat, w, k + 1, h) * self.js.joints[j].conj()).log();
                    let r = e - articulation::vec_at(&self.u, 6 + 3 * j) * h;
                    max_residual = max_residual.max(r.norm());
                    errs.push(e);
                }
                // Below this the error is integration rounding, not a disturbance.
                if max_residual > 1e-10 {
                    stiffness = pjsc_lambda;
                } else {
                    errs.clear();
                }
            }
            ControlMode::TorquePD { kp, .. } if kp > 0.0 => {
                stiffness = kp;
                errs = (0..nj).map(|j| (targets.pd_target[j] * self.js.joints[j].conj()).log()).collect();
            }
            _ => {}
        }
        let kd = match self.mode {
            ControlMode::TorquePD { kd, .. } => kd,
            _ => 0.0,
        };
        let damping = self.config.joint_damping + kd;
        let gravity = self.config.human_gravity;
        if stiffness == 0.0 && damping == 0.0 && !gravity {
            return;
        }

        let m = mass_matrix.get_or_insert_with(|| self.art.mass_matrix(kin));
        if gravity {
            if let Some(s) = MassSolver::new(m, fixed_root) {
                let g = self.art.gravity_force(kin, self.config.gravity);
                for (uk, dk) in self.u.iter_mut().zip(s.solve(&g)) {
                    *uk += dk * h;
                }
            }
        }
        if stiffness == 0.0 && damping == 0.0 {
            return;
        }
        // (M + h c + h² k) u' = M u + h k err, on joint coordinates.
        let off = if fixed_root { 6 } else { 0 };
        let uv = nalgebra::DVector::from_column_slice(&self.u);
        let mut rhs = (&*m * &uv).rows(off, n - off).into_owned();
        let mut lhs = m.view((off, off), (n - off, n - off)).into_owned();
        let diag_add = h * damping + h * h * stiffness;
        for r in (6 - off)..(n - off) {
            lhs[(r, r)] += diag_add;
        }
        for (j, err) in errs.iter().enumerate() {
            for c in 0..3 {
                rhs[6 - off + 3 * j + c] += h * stiffness * err[c];
            }
        }
        if fixed_root {
            // The root velocity is prescribed, so its coupling drops out.
            rhs -= m.view((6, 0), (n - 6, 6)) * nalgebra::DVector::from_column_slice(&self.u[..6]);
        }
        if let Some(chol) = lhs.cholesky() {
            let sol = chol.solve(&rhs);
            self.u[off..].copy_from_slice(sol.as_slice());
        }
    }

    fn collide(&self, kin: &Kinematics, h: f64) -> Result<Vec<Contact>, Error> {
        struct Entry<'a> {
            id: ColliderId,
            shape: &'a Shape,
            pose: Pose,
            reach: f64,
        }
        let human_dynamic = !matches!(self.mode, ControlMode::PositionTeleport);
        let link_vels = if human_dynamic { Some(self.art.link_velocities(kin, &self.u)) } else { None };
        let offset = self.config.slop;
        let mut entries: Vec<Entry> = Vec::new();
        let mut aabbs: Vec<Aabb> = Vec::new();
        for &i in &self.colliding_links {
            let shape = &self.art.spec.links()[i].shape;
            let reach = link_vels
                .as_ref()
                .map(|v| (v[i].linear.norm() + v[i].angular.norm() * shape.bounding_radius()) * h)
                .unwrap_or(0.0);
            aabbs.push(compute_aabb(shape, &kin.poses[i], offset + reach));
            entries.push(Entry { id: ColliderId::Link(i), shape, pose: kin.poses[i], reach });
        }
        for (i, (o, s)) in self.scene.objects.iter().zip(&self.objects).enumerate() {
            let reach = (s.velocity.linear.norm() + s.velocity.angular.norm() * o.shape.bounding_radius()) * h;
            aabbs.push(compute_aabb(&o.shape, &s.pose, offset + reach));
            entries.push(Entry { id: ColliderId::Object(i), shape: &o.shape, pose: s.pose, reach });
        }
        for (i, s) in self.scene.static_colliders.iter().enumerate() {
            aabbs.push(self.static_aabbs[i]);
            entries.push(Entry { id: ColliderId::Static(i), shape: &s.shape, pose: s.pose, reach: 0.0 });
        }

        let mut contacts = Vec::new();
        for (i, j) in broadphase(&aabbs) {
            let (a, b) = (&entries[i], &entries[j]);
            match (a.id, b.id) {
                (ColliderId::Link(_), ColliderId::Link(_)) | (ColliderId::Static(_), ColliderId::Static(_)) => continue,
                _ => {}
            }
            let margin = offset + a.reach + b.reach;
            let points = narrowphase_with_margin(a.shape, &a.pose, b.shape, &b.pose, margin)?;
            let (fa, ra) = self.material(a.id);
            let (fb, rb) = self.material(b.id);
            let (f, r) = (combine_friction(fa, fb), combine_restitution(ra, rb));
            contacts.extend(points.into_iter().map(|p| Contact::new(a.id, b.id, p, f, r)));
        }
        Ok(contacts)
    }

    fn material(&self, id: ColliderId) -> (f64, f64) {
        match id {
            ColliderId::Link(_) => (self.config.body_friction, 0.0),
            ColliderId::Object(i) => (self.scene.objects[i].friction, self.scene.objects[i].restitution),
            ColliderId::Static(i) => (self.scene.static_colliders[i].friction, 0.0),
        }
    }
}

/// Simulates `seq` from its first frame and returns one record per frame
/// (frame 0 is the initial state).
pub fn run(
    spec: &ArticulatedBodySpec,
    seq: &MotionSequence,
    scene: &SceneSpec,
    config: &SimConfig,
    mode: ControlMode,
) -> Result<Trajectory, Error> {
    let mut sim = Simulator::new(spec.clone(), scene, *config, mode, &seq.frames()[0])?;
    let mut traj = Trajectory::default();
    traj.records.push(sim.record());
    traj.diagnostics.push(FrameDiagnostics::default());
    for t in 1..seq.len() {
        let d = sim.step_frame(seq, t)?;
        traj.records.push(sim.record());
        traj.diagnostics.push(d);
    }
    Ok(traj)
}

/// Trajectory that follows the kinematic targets exactly and leaves every
/// object at its initial pose (no simulation at all).
pub fn kinematic_replay(spec: &ArticulatedBodySpec, seq: &MotionSequence, scene: &SceneSpec) -> Trajectory {
    let records = seq
        .frames()
        .iter()
        .enumerate()
        .map(|(t, js)| FrameRecord {
            frame: t,
            time: t as f64 * seq.dt(),
            root: js.root,
            joints: js.joints.clone(),
            links: crate::body::forward_kinematics(spec, js),
            objects: scene
                .objects
                .iter()
                .map(|o| ObjectRecord { name: o.name.clone(), pose: o.pose, velocity: o.velocity })
                .collect(),
        })
        .collect();
    Trajectory { diagnostics: vec![FrameDiagnostics::default(); seq.len()], records }
}

#[cfg(test)]
mod tests;
