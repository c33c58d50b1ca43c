use crate::arith::ArithError;
use crate::logic::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("refusing: {required} ground atoms exceed the oracle budget of {max}")]
    Budget { required: usize, max: usize },
    #[error("refusing: {count} nullary predicates exceed the expansion bound of {bound}")]
    ShannonBound { count: usize, bound: usize },
    #[error("normalizer ({stage}): {msg}")]
    Stage { stage: &'static str, msg: String },
    #[error("cell table: {0}")]
    Cells(String),
    #[error("timed out after {0} ms")]
    Timeout(u128),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Refusals are deliberate limits, not failures (CLI exit code 2).
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::ShannonBound { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
