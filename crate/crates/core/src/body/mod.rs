//! Articulated rigid-body description and forward/inverse kinematics.
//!
//! A body is a tree of links. Link 0 is the root (pelvis); every other link
//! hangs off its parent through a 3-DoF ball joint, so there are exactly
//! `links - 1` joints and joint `j` drives link `j + 1`.
//!
//! Each joint sits at `anchor_parent` in the parent frame and at
//! `anchor_child` in the child frame. The rest pose has all joint rotations
//! equal to identity.

mod spec_file;
mod templates;

pub use spec_file::{parse_body_spec, BodySpecFile, LinkSpecFile};
pub use templates::{build_humanoid, TEMPLATES};

use serde::{Deserialize, Serialize};

use crate::math::{Pose, Quat, SpatialVelocity, Vec3};
use crate::shape::Shape;
use crate::{math::InertiaSpec, Error};

/// Density used when a link declares a shape but no mass, kg/m³.
pub const DEFAULT_DENSITY: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub name: String,
    pub parent: Option<usize>,
    pub anchor_parent: Vec3,
    pub anchor_child: Vec3,
    pub shape: Shape,
    pub inertia: InertiaSpec,
    pub collision_enabled: bool,
}

/// Validated, immutable articulated body.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticulatedBodySpec {
    name: String,
    links: Vec<LinkSpec>,
    depth: Vec<usize>,
}

impl ArticulatedBodySpec {
    pub fn new(name: impl Into<String>, links: Vec<LinkSpec>) -> Result<Self, Error> {
        if links.is_empty() {
            return Err(Error::InvalidSpec("body has no links".into()));
        }
        let mut depth = Vec::with_capacity(links.len());
        for (i, link) in links.iter().enumerate() {
            match (i, link.parent) {
                (0, None) => depth.push(0),
                (0, Some(_)) => return Err(Error::InvalidSpec("link 0 must be the root".into())),
                (_, None) => {
                    return Err(Error::InvalidSpec(format!("link {i} ({}) has no parent; only one root allowed", link.name)))
                }
                (_, Some(p)) if p >= i => {
                    return Err(Error::InvalidSpec(format!(
                        "link {i} ({}) has parent {p}; parents must precede children",
                        link.name
                    )))
                }
                (_, Some(p)) => depth.push(depth[p] + 1),
            }
            if link.shape.is_static_only() {
                return Err(Error::InvalidSpec(format!("link {} uses a static-only shape", link.name)));
            }
            link.shape.validate()?;
            link.inertia.validate()?;
            if !link.anchor_parent.is_finite() || !link.anchor_child.is_finite() {
                return Err(Error::InvalidSpec(format!("link {} has non-finite anchors", link.name)));
            }
        }
        Ok(Self { name: name.into(), links, depth })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn joint_count(&self) -> usize {
        self.links.len() - 1
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    /// Tree depth of each link (root = 0).
    pub fn depth(&self, link: usize) -> usize {
        self.depth[link]
    }

    pub fn parent(&self, link: usize) -> Option<usize> {
        self.links[link].parent
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.inertia.mass).sum()
    }

    /// Mass-weighted centre of the given link poses.
    pub fn center_of_mass(&self, poses: &[Pose]) -> Vec3 {
        let mut acc = Vec3::ZERO;
        for (link, pose) in self.links.iter().zip(poses) {
            acc += pose.transform_point(link.inertia.com) * link.inertia.mass;
        }
        acc / self.total_mass()
    }

    /// Lowest world z reached by any link shape in the given poses.
    pub fn lowest_point(&self, poses: &[Pose]) -> f64 {
        self.links
            .iter()
            .zip(poses)
            .map(|(l, p)| {
                let local_down = p.inverse_transform_vector(-Vec3::Z);
                p.transform_point(l.shape.support(local_down)).z
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Root height at which the rest pose just touches `z = 0`.
    pub fn standing_height(&self) -> f64 {
        let rest = forward_kinematics(self, &JointSpaceState::rest(self.joint_count()));
        -self.lowest_point(&rest)
    }
}

/// Generalized coordinates: root placement plus per-joint rotations
/// (child relative to parent).
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpaceState {
    pub root: Pose,
    pub joints: Vec<Quat>,
}

impl JointSpaceState {
    pub fn rest(joint_count: usize) -> Self {
        Self { root: Pose::IDENTITY, joints: vec![Quat::IDENTITY; joint_count] }
    }

    pub fn with_root(root: Pose, joint_count: usize) -> Self {
        Self { root, joints: vec![Quat::IDENTITY; joint_count] }
    }
}

/// Maximal coordinates: per-link world poses and velocities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkSpaceState {
    pub poses: Vec<Pose>,
    pub velocities: Vec<SpatialVelocity>,
}

/// World poses of every link.
///
/// Panics if `js` does not have one rotation per joint.
pub fn forward_kinematics(spec: &ArticulatedBodySpec, js: &JointSpaceState) -> Vec<Pose> {
    assert_eq!(js.joints.len(), spec.joint_count(), "joint count mismatch");
    let mut poses = Vec::with_capacity(spec.link_count());
    poses.push(js.root);
    for (i, link) in spec.links.iter().enumerate().skip(1) {
        let parent = poses[link.parent.unwrap_or(0)];
        let orientation = parent.orientation * js.joints[i - 1];
        let joint_world = parent.transform_point(link.anchor_parent);
        let position = joint_world - orientation.rotate(link.anchor_child);
        poses.push(Pose::new(position, orientation));
    }
    poses
}

/// World position of every joint, indexed by joint (link index - 1).
pub fn joint_positions(spec: &ArticulatedBodySpec, poses: &[Pose]) -> Vec<Vec3> {
    spec.links
        .iter()
        .enumerate()
        .skip(1)
        .map(|(_, l)| poses[l.parent.unwrap_or(0)].transform_point(l.anchor_parent))
        .collect()
}

/// Propagates root and joint velocities down the tree.
///
/// `joint_omegas[j]` is the angular velocity of link `j + 1` relative to its
/// parent, expressed in the parent frame. Returned velocities are for link
/// frame origins, world frame.
pub fn forward_velocity(
    spec: &ArticulatedBodySpec,
    poses: &[Pose],
    root_vel: SpatialVelocity,
    joint_omegas: &[Vec3],
) -> Vec<SpatialVelocity> {
    assert_eq!(joint_omegas.len(), spec.joint_count(), "joint count mismatch");
    let mut vels = Vec::with_capacity(spec.link_count());
    vels.push(root_vel);
    for (i, link) in spec.links.iter().enumerate().skip(1) {
        let p = link.parent.unwrap_or(0);
        let parent_pose = poses[p];
        let parent_vel: SpatialVelocity = vels[p];
        let angular = parent_vel.angular + parent_pose.orientation.rotate(joint_omegas[i - 1]);
        let lever_parent = parent_pose.orientation.rotate(link.anchor_parent);
        let lever_child = poses[i].orientation.rotate(link.anchor_child);
        let linear = parent_vel.linear + parent_vel.angular.cross(lever_parent) - angular.cross(lever_child);
        vels.push(SpatialVelocity::new(linear, angular));
    }
    vels
}

/// Closed-form recovery of joint rotations from link orientations.
///
/// Returns the joint state and the largest joint-anchor mismatch (m) between
/// each child and its parent; the recovered state itself always satisfies the
/// anchors exactly when passed back through [`forward_kinematics`].
pub fn joint_state_from_links(spec: &ArticulatedBodySpec, poses: &[Pose]) -> (JointSpaceState, f64) {
    assert_eq!(poses.len(), spec.link_count(), "link count mismatch");
    let mut residual: f64 = 0.0;
    let mut joints = Vec::with_capacity(spec.joint_count());
    for (i, link) in spec.links.iter().enumerate().skip(1) {
        let parent = poses[link.parent.unwrap_or(0)];
        let child = poses[i];
        joints.push(parent.orientation.conj() * child.orientation);
        let gap = parent.transform_point(link.anchor_parent) - child.transform_point(link.anchor_child);
        residual = residual.max(gap.norm());
    }
    (JointSpaceState { root: poses[0], joints }, residual)
}
