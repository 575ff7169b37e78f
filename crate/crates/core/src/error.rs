use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
///
/// Every variant maps onto one of three coarse categories (see
/// [`Error::category`]) which the CLI turns into process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty table: {0}")]
    EmptyTable(String),

    #[error("cannot impute feature '{feature}': {reason}")]
    Impute { feature: String, reason: String },

    #[error("feature selection failed: {0}")]
    Selection(String),

    #[error("augmentation failed: {0}")]
    Augmentation(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("degenerate embedding: {0}")]
    DegenerateEmbedding(String),

    #[error("neighbor graph is disconnected ({components} components); increase k")]
    Disconnected { components: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid {grid}x{grid} cannot hold {features} features")]
    Capacity { grid: usize, features: usize },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("diagnostics error: {0}")]
    Diagnostics(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
}

/// Coarse error classes, used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Usage,
            Error::DegenerateEmbedding(_)
            | Error::Disconnected { .. }
            | Error::Numeric(_)
            | Error::Diagnostics(_)
            | Error::UndefinedMetric(_) => ErrorCategory::Numeric,
            _ => ErrorCategory::Data,
        }
    }
}
