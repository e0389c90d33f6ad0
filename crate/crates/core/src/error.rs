use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("point ({x}, {y}) is outside the map extent")]
    OutOfExtent { x: f64, y: f64 },
    #[error("cell ({col}, {row}) is not a valid map cell")]
    InvalidCell { col: usize, row: usize },
    #[error("pose ({x}, {y}) lies inside a solid cell")]
    PoseInSolid { x: f64, y: f64 },
    #[error("no free cells to sample from")]
    NoFreeCells,
    #[error("rejection sampling budget exhausted")]
    SamplingBudget,
    #[error("planner made no progress")]
    NoProgress,
    #[error("goal is unreachable")]
    Unreachable,
    #[error("start cell is not traversable")]
    StartBlocked,
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
