use std::path::PathBuf;

pub type Result<T, E = ScenarioError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON or a field of the wrong shape.
    #[error("{origin}:{line}:{column}: at `{field}`: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },

    /// Well-formed input that breaks a model invariant.
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("case study: {0}")]
    Inconsistent(String),

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {message}")]
    TraceFormat { path: PathBuf, message: String },

    #[error(transparent)]
    Model(#[from] ffr_inertia::Error),
}

impl ScenarioError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| ScenarioError::Io { path, source }
    }
}
