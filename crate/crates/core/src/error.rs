use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution failed validation at construction.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A weight vector failed validation at construction.
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// Inconsistent or unusable configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An iterative method ran out of budget or missed its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed textual input (driver strings, tables, manifests).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical method rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
