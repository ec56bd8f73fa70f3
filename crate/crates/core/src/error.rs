use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside its domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Inputs have inconsistent lengths or shapes.
    #[error("structural error: {0}")]
    Structural(String),
    /// A scenario identifier does not follow the `A-<taps>,<C|SC>-<taps>` grammar.
    #[error("cannot parse scenario `{id}`: {reason}")]
    Scenario { id: String, reason: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
}
