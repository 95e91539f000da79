use thiserror::Error;

use crate::angular::Direction;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown example tag `{0}`")]
    UnknownExample(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("reduced system singular for direction {direction:?}: {reason}")]
    SingularReduced { direction: Direction, reason: String },

    #[error("direct solve of {unknowns} unknowns exceeds the cap of {cap}")]
    TooLarge { unknowns: usize, cap: usize },

    #[error("least-squares design is rank deficient: {0}")]
    RankDeficient(String),

    #[error("source iteration failed: {0}")]
    NotConverged(String),

    #[error("no unselected training directions remain")]
    TrainingExhausted,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
