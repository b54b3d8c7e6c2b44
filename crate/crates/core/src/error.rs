use thiserror::Error;

/// Errors produced by model construction, simulation, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter is outside its allowed range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller broke a documented precondition (e.g. unsorted time tags).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Normalization is undefined (zero rate or zero integration time).
    #[error("normalization undefined: {0}")]
    Normalization(String),

    /// The analysis window is too short for the requested estimate.
    #[error("analysis window too short: {0}")]
    AnalysisWindow(String),

    /// A link-budget chain referenced a stage that is not defined.
    #[error("unknown budget stage `{0}`")]
    UnknownStage(String),

    /// A solved operating point falls outside the device range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A data file did not match the expected format.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
