use std::path::PathBuf;

/// Pipeline error, split by what the caller can do about it: `Data` means
/// the inputs are wrong (exit code 2 at the CLI), `Numeric` means the
/// computation itself failed (exit code 3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{context}: {message}")]
    Data { context: String, message: String },

    #[error("{context}: {message}")]
    Numeric { context: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Tensor(#[from] tensorkit::TensorError),
}

impl Error {
    pub fn data(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Data { context: context.into(), message: message.into() }
    }

    pub fn numeric(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Numeric { context: context.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// CLI exit code taxonomy: 2 for bad inputs, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Data { .. } | Error::Io { .. } => 2,
            Error::Numeric { .. } | Error::Tensor(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
