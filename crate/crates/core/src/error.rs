use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid detection: {0}")]
    InvalidDetection(String),

    #[error("all torso keypoints are occluded")]
    AllOccluded,

    #[error("degenerate torso: |p_h| = {0:e} px")]
    DegenerateTorso(f64),

    #[error("non-finite orientation ratio")]
    NonFiniteRatio,

    #[error("k-means needs at least {needed} distinct ratios, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gallery has no absorbed detections")]
    BothEmpty,

    #[error("innovation covariance is singular (condition number {0:e})")]
    SingularInnovation(f64),

    #[error("particle set is empty")]
    EmptyParticleSet,

    #[error("malformed message at byte {offset}: {reason}")]
    MalformedMessage { offset: usize, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid world spec: {0}")]
    InvalidSpec(String),

    #[error("re-id gallery is empty")]
    EmptyGallery,

    #[error("{context}: {message}")]
    Io { context: String, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn malformed(offset: usize, reason: impl Into<String>) -> Self {
        Error::MalformedMessage {
            offset,
            reason: reason.into(),
        }
    }

    pub fn io(context: impl Into<String>, err: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            message: err.to_string(),
        }
    }

    /// True for errors caused by bad user input rather than a failing system call
    /// or an internal numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidDetection(_)
                | Error::Parse { .. }
                | Error::InvalidSpec(_)
                | Error::DimensionMismatch { .. }
                | Error::MalformedMessage { .. }
                | Error::TooFewSamples { .. }
                | Error::EmptyGallery
        )
    }
}
