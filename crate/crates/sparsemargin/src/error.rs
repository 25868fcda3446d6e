use thiserror::Error;

/// Errors produced by dataset construction, solvers and selectors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv error at line {line}: {msg}")]
    Csv { line: u64, msg: String },

    #[error("invalid label {value} at line {line}: labels must be -1 or +1")]
    InvalidLabel { line: u64, value: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid cue schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("movement `{0}` is not present in the schedule")]
    UnknownMovement(String),

    #[error("not enough `{movement}` cues: requested {requested} training cues but the schedule has {available}")]
    TooFewCues {
        movement: String,
        requested: usize,
        available: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("parameter selection failed: {0}")]
    Selection(String),

    #[error("electrode map error: {0}")]
    ElectrodeMap(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
