use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("shape mismatch: {message}")]
    ShapeMismatch { message: String },

    #[error("state norm defect {defect:.3e} exceeds the allowed {limit:.1e}")]
    Normalization { defect: f64, limit: f64 },

    #[error("integration failed at t = {t_reached}: {message}")]
    Integration { t_reached: f64, message: String },

    #[error("numerical failure: {message}")]
    Numeric { message: String },

    #[error("bad sample grid: {message}")]
    Grid { message: String },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numeric(message: impl Into<String>) -> Self {
        Error::Numeric {
            message: message.into(),
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
