use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
///
/// Variants split into two families: input problems (`Validation`, `Parse`,
/// `Undefined`) that the CLI reports with exit code 1, and runtime failures
/// (I/O, decoding, numerics) that map to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    /// A statistic is mathematically undefined for the given input
    /// (e.g. rank correlation of a constant series).
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("missing attribute(s) for `{lemma}`: {missing}")]
    MissingAttribute { lemma: String, missing: String },

    #[error("failed to decode image {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for validation-type errors, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Parse { .. }
            | Error::Undefined(_)
            | Error::MissingAttribute { .. } => 1,
            _ => 2,
        }
    }
}
