use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Points or balls from different spaces were combined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The system lacks an inverse or a jacobian required by the request.
    #[error("capability error: {0}")]
    Capability(String),
    #[error("not a cover: probe point {0} is not inside any cover element")]
    NotACover(String),
    #[error("construction error: {0}")]
    Construction(String),
    /// Every sample fell outside the dynamical ball already at the first window.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
