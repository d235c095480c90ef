use thiserror::Error;

use crate::space::PointId;

#[derive(Debug, Error)]
pub enum CoarseError {
    #[error("point {0:?} is not a point of this space")]
    MissingPoint(PointId),
    #[error("duplicate point id {0:?}")]
    DuplicatePoint(PointId),
    #[error("basepoint {0:?} is not among the points")]
    BasepointMissing(PointId),
    #[error("radius {0} exceeds the largest declared radius {1}")]
    RadiusOutOfRange(f64, f64),
    #[error("declared radii must be a nonempty ascending list of non-negative reals")]
    BadRadii,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("maps must share towers: {0}")]
    TowerMismatch(&'static str),
    #[error("family members overlap at point {0:?}")]
    OverlappingMembers(PointId),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("instance too large: {0}")]
    CapExceeded(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("set is bounded where an unbounded set is required: {0}")]
    BoundedInput(String),
    #[error("unknown corpus entry '{0}'")]
    UnknownCorpusEntry(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, CoarseError>;
