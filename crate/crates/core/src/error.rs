use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("form not regular at infinity (deg num = {num_degree}, deg den = {den_degree})")]
    NotRegularAtInfinity { num_degree: usize, den_degree: usize },

    #[error("pole not simple at {0}")]
    PoleNotSimple(String),

    #[error("form is not generic: {0}")]
    NonGeneric(String),

    #[error("numerical failure in {stage}: {detail}")]
    Numerical { stage: &'static str, detail: String },

    #[error("invariant violated in {stage}: {detail}")]
    Invariant { stage: &'static str, detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(stage: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            stage,
            detail: detail.into(),
        }
    }

    pub(crate) fn invariant(stage: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            stage,
            detail: detail.into(),
        }
    }
}
