use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: korteweg_core::Error,
    },
    #[error("fit: {0}")]
    Fit(String),
    #[error("predictor: {0}")]
    Predictor(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Attaches run context to core errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for korteweg_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Solver { context: what(), source })
    }
}
