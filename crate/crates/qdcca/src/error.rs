use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("timestamp grids of {0} do not intersect")]
    EmptyIntersection(String),

    #[error("target correlation matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] qdcca_core::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Csv { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Config(_) => "config",
            Error::EmptyIntersection(_) => "empty-intersection",
            Error::NotPositiveDefinite => "not-positive-definite",
            Error::Data(_) => "data",
            Error::Core(_) => "numeric",
            Error::Json(_) => "serialization",
        }
    }
}
