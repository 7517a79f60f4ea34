//! Error categories and their exit codes: 2 for configuration violations,
//! 3 for data-quality failures, 4 for I/O. Fatal errors are printed to
//! stderr as a single JSON line.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Data,
    Io,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Data => 3,
            Category::Io => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Data => "data",
            Category::Io => "io",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            category: Category::Config,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            category: Category::Data,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            category: Category::Io,
            message: message.into(),
        }
    }
}

impl From<mfdfa_core::Error> for CliError {
    fn from(e: mfdfa_core::Error) -> Self {
        let category = match &e {
            mfdfa_core::Error::Config(_) => Category::Config,
            mfdfa_core::Error::Data(_) => Category::Data,
            mfdfa_core::Error::Io(_) => Category::Io,
        };
        CliError {
            category,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
