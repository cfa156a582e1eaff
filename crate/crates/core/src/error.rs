use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("unknown body template `{0}`")]
    UnknownTemplate(String),
    #[error("unknown synthetic motion kind `{0}`")]
    UnknownMotion(String),
    #[error("invalid motion: {0}")]
    Motion(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported collision pair: {0} vs {1}")]
    UnsupportedPair(&'static str, &'static str),
    #[error("frame index {frame} out of range (sequence has {frames} frames)")]
    FrameOutOfRange { frame: usize, frames: usize },
    #[error("simulation aborted at frame {frame}: {detail}")]
    Diverged { frame: usize, detail: String },
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
    #[error("malformed trajectory line {line}: {message}")]
    MalformedTrajectory { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { path: path.into(), message: message.into() }
    }
}
