use std::path::PathBuf;

use thiserror::Error;

/// Everything that maps to exit code 2. Property failures are not errors;
/// they come back inside a [`crate::output::Report`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] hkq_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}
