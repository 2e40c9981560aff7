use thiserror::Error;

#[derive(Debug, Error)]
pub enum LathomError {
    #[error("window escapes domain at site {site:?} along direction {xi:?}")]
    WindowEscapes { site: Vec<i64>, xi: Vec<i64> },

    #[error("site {site:?} is outside the domain and the extension policy is strict")]
    OutOfDomain { site: Vec<i64> },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("instance too large for the brute-force oracle: {free} free scalars (limit {limit})")]
    InstanceTooLarge { free: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<X> = std::result::Result<X, LathomError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LathomError {
    LathomError::InvalidInput(msg.into())
}
