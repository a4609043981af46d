use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("truncation too small: {message} (suggested half-width {suggested:.4})")]
    Truncation { message: String, suggested: f64 },

    #[error("stabilization grid too small: {0}")]
    GridTooSmall(String),

    #[error("value outside tabulated range: {0}")]
    Extrapolation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("replicate failed (seed {seed}, stream {stream}): {message}")]
    Replicate {
        seed: u64,
        stream: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
