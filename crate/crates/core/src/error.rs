use std::path::PathBuf;

/// Crate-wide error type.
///
/// Variants map onto the CLI exit codes: config/parameter problems exit 2,
/// data-validation problems exit 3, undefined metrics exit 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("data validation failed: {0}")]
    Validation(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 0 success, 2 config error,
    /// 3 data-validation error, 4 undefined metric, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Config(_) | Error::Calibration(_) => 2,
            Error::Usage(_) | Error::Validation(_) => 3,
            Error::UndefinedMetric(_) => 4,
            Error::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
