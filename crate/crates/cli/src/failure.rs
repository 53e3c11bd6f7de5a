use std::fmt;

/// An error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    /// Bad configuration or usage (exit 2).
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    /// The numerics did not produce a result (exit 3).
    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    /// Filesystem trouble while writing results (exit 1).
    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<kitune::Error> for Failure {
    fn from(e: kitune::Error) -> Self {
        use kitune::Error::*;
        match e {
            InvalidArgument(_) | InvalidConfiguration(_) | InvalidSchedule(_) | UnsupportedConfiguration(_) => {
                Self::config(e.to_string())
            }
            Csv(_) | Io(_) => Self::config(e.to_string()),
            _ => Self::numeric(e.to_string()),
        }
    }
}
