//! Velocity-driven "half physics": an articulated human follows kinematic
//! pose targets through enforced velocities while static scenes and dynamic
//! rigid objects respond through contact physics.
//!
//! The pipeline per motion frame is: compute enforced velocities from the
//! current simulated state and the next kinematic target
//! ([`kinematics::frame_velocities`]), run the contact-aware stepper over a
//! fixed number of substeps ([`dynamics::Simulator`]), and recover joint-space
//! state for the next frame.

pub mod body;
pub mod collision;
pub mod dynamics;
pub mod fixtures;
pub mod kinematics;
pub mod math;
pub mod metrics;
pub mod scenario;
pub mod shape;

mod error;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
