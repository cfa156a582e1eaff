//! Scenario files, scene descriptions, trajectory persistence and mesh export.

mod export;
mod file;
mod scene;
mod trajectory;

pub use export::*;
pub use file::*;
pub use scene::*;
pub use trajectory::*;
