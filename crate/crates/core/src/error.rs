use thiserror::Error;

use crate::model::Requirement;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable {0} appears more than once in a requirement")]
    DuplicateVariable(u32),

    #[error("a requirement holds 1 to 3 literals, got {0}")]
    Arity(usize),

    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("universal equations are generated from positive requirements, got {0}")]
    Polarity(Requirement),

    #[error("variable {0} is fixed to both 0 and 1")]
    ContradictoryData(u32),

    #[error("enumeration over {bits} free bits exceeds the limit of {limit}")]
    TooLarge { bits: u32, limit: u32 },

    /// Partial probabilities are bounded by the normalization equations, so an
    /// unbounded objective means the system was built wrong.
    #[error("encoding anomaly: {0}")]
    EncodingAnomaly(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
