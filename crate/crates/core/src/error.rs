use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {n} input bits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("bit string of length {found} does not describe a function of {n} inputs")]
    BadLength { n: usize, found: usize },
    #[error("the zero vector cannot be amplitude encoded")]
    UnencodableOrigin,
    #[error("input entry {0} is not a bit")]
    NonBinary(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("singular value {0} exceeds 1")]
    SpectralBoundViolated(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("requested {requested} training points but only {available} inputs are available")]
    TooManyTrainingPoints { requested: usize, available: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("requested {requested} components but the data has rank {rank}")]
    RankDeficient { requested: usize, rank: usize },
    #[error("class {class} has {found} members, {needed} needed")]
    InsufficientClass { class: u8, found: usize, needed: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
