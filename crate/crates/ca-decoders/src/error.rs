use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distance {d}: {reason}")]
    InvalidDistance { d: usize, reason: &'static str },
    #[error("value {0} is outside the allowed domain")]
    Domain(f64),
    #[error("{count} defects exceed the exact matcher cap of {cap}")]
    TooManyDefects { count: usize, cap: usize },
    #[error("odd number of defects ({0})")]
    OddDefectCount(usize),
    #[error("syndrome is not empty")]
    NonTrivialSyndrome,
    #[error("linear system is numerically singular")]
    SingularSystem,
    #[error("need at least {need} points, got {got}")]
    InsufficientPoints { need: usize, got: usize },
    #[error("{censored} of {shots} trials hit the step cap (budget 0.1%)")]
    CensorBudgetExceeded { censored: u64, shots: u64 },
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
