//! Command implementations behind the `halfphys` binary. Each command
//! returns its printable output; `main` only handles argument parsing,
//! printing and exit codes.

pub mod ablate;
pub mod bench;
mod error;
pub mod metrics;
pub mod run;

pub use error::{CliError, EXIT_ABORT, EXIT_CONFIG, EXIT_IO};
