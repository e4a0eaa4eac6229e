use thiserror::Error;

use crate::spaces::PointId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("resource limit exceeded: {what} needs {count}, cap is {cap}")]
    Resource { what: &'static str, count: u128, cap: u128 },

    #[error("space mismatch: expected `{expected}`, found `{found}`")]
    SpaceMismatch { expected: String, found: String },

    #[error("unknown point id {0}")]
    UnknownPoint(PointId),

    #[error("metric violation: {0}")]
    Metric(String),

    #[error("coarse map violates its controls: {0}")]
    Control(String),

    #[error("target point {point} is farther than {radius} from the image")]
    HullCoverage { point: PointId, radius: u64 },

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("game state: {0}")]
    Game(String),

    #[error("unknown: {0}")]
    Unknown(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
