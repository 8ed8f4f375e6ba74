use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Validation { what: &'static str, reason: String },

    #[error("block {k} is empty (frequency growth too fast for the chosen ratio)")]
    EmptyBlock { k: u32 },

    #[error("sequence exhausted: index {index} requested from a list of length {len}")]
    Exhausted { index: usize, len: usize },

    #[error("tail tolerance {eps} unreachable within {cap} terms")]
    TruncationUnreachable { eps: f64, cap: usize },

    #[error("only {found} usable scales after the fit policy (need at least {needed})")]
    TooFewScales { found: usize, needed: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("parameters outside the range covered by the dimension theorems: {0}")]
    NotCovered(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("image encoding: {0}")]
    Image(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            what,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input, as opposed to runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. } | Error::Json(_) | Error::NotCovered(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
