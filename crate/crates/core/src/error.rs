use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A document could not be parsed. `context` carries the field path and,
    /// for JSON, the line and column.
    #[error("parse error: {context}: {message}")]
    Parse { context: String, message: String },

    /// A value parsed fine but breaks a model invariant.
    #[error("invalid {what}: {reason}")]
    Validation { what: String, reason: String },

    /// The requested design cannot be built, e.g. the area budget is below
    /// a single PE.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Not enough (or degenerate) data for a least-squares fit.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl Error {
    pub(crate) fn invalid(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation { what: what.into(), reason: reason.into() }
    }

    /// True for errors caused by the caller's input (as opposed to a design
    /// that simply does not fit).
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Infeasible(_))
    }
}
