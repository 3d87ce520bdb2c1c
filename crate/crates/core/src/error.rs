use thiserror::Error;

/// Errors surfaced by the library. Each variant carries enough context to
/// print a one-line diagnostic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("invalid index: {0}")]
    Index(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resolution violation: {0}")]
    Resolution(String),
    #[error("memory budget exceeded: need ~{need_mb} MB, cap {cap_mb} MB")]
    Budget { need_mb: u64, cap_mb: u64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("finite-difference step underflow: {0}")]
    StepUnderflow(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("config error{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config { line: None, msg: msg.into() }
    }
}
