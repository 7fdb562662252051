use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: probability {probability} outside (0, 1)")]
    Probability { line: usize, probability: f64 },
    #[error("line {line}: undetectable logical error channel (no detectors, observables {observables:?})")]
    Undetectable { line: usize, observables: Vec<u32> },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid noise configuration: {0}")]
    InvalidNoise(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("brute-force decoder supports at most {cap} mechanisms, model has {actual}")]
    TooManyMechanisms { cap: usize, actual: usize },
    #[error("model has no error mechanisms")]
    EmptyModel,
    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("round metadata unavailable: {0}")]
    MissingRounds(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
