use thiserror::Error;

/// Failure categories shared by every module in the crate.
///
/// `Config` means a parameter or invariant of a configuration type was
/// violated; `Data` means the input series cannot support the requested
/// computation (too short, malformed, degenerate).
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
