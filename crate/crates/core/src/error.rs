use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-supplied parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Fields or grids that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// The time stepper detected instability or non-finite values.
    #[error("numerical abort at step {step}: {reason}")]
    Numerical { step: u64, reason: String },

    /// Post-processing could not extract the requested quantity.
    #[error("analysis error: {0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
