use thiserror::Error;

/// Errors raised by the solvers, monitors and the scenario runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{module}: numerical instability at t = {time:.6e}: {detail}")]
    Instability {
        module: &'static str,
        time: f64,
        detail: String,
    },

    #[error("time {time} is at or past the singular time {singular_time}")]
    Singularity { time: f64, singular_time: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("search failure: {0}")]
    Search(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
