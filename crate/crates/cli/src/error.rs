use std::path::Path;

use halfphys_core::Error;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ABORT: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{failed} of {total} sweep runs failed")]
    SweepFailed { failed: usize, total: usize },
}

impl CliError {
    /// Process exit status: 2 configuration, 3 simulation abort, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::SweepFailed { .. } => EXIT_ABORT,
            CliError::Core(e) => match e {
                Error::Diverged { .. } => EXIT_ABORT,
                Error::Io(_) | Error::MalformedTrajectory { .. } => EXIT_IO,
                _ => EXIT_CONFIG,
            },
        }
    }
}

/// Attaches `path` to I/O-flavoured failures.
pub(crate) fn at(path: &Path) -> impl FnOnce(Error) -> CliError + '_ {
    move |e| match e {
        Error::Io(_) | Error::MalformedTrajectory { .. } => CliError::Io { path: path.display().to_string(), source: e },
        other => CliError::Core(other),
    }
}
