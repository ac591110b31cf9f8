use thiserror::Error;

use crate::procgroup::GroupError;

#[derive(Debug, Error)]
pub enum AmrError {
    #[error("level {level} out of range (maximum {max})")]
    LevelOutOfRange { level: u32, max: u32 },
    #[error("child index {index} out of range for an element with {count} children")]
    ChildOutOfRange { index: usize, count: usize },
    #[error("face {face} out of range for an element with {count} faces")]
    FaceOutOfRange { face: usize, count: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("face {face} of the element does not lie on the root boundary")]
    NotOnRootFace { face: usize },
    #[error("coarse mesh line {line}: {message}")]
    CmeshParse { line: usize, message: String },
    #[error("invalid coarse mesh: {0}")]
    CmeshInvalid(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("malformed message payload: {0}")]
    Payload(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = AmrError> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(AmrError::Domain(msg.into()))
}
