use thiserror::Error;

/// Errors produced by the MVSK library.
#[derive(Debug, Error)]
pub enum MvskError {
    #[error("parse error at line {}{}: {message}", line + 1, column.map(|c| format!(", column {}", c + 1)).unwrap_or_default())]
    Parse {
        line: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("at least 2 samples per asset are required, found {found}")]
    InsufficientSamples { found: usize },

    #[error("{found} assets exceeds the supported maximum of {max}")]
    TooManyAssets { found: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("non-finite {quantity} at iteration {iteration}")]
    Numerical { iteration: usize, quantity: &'static str },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = MvskError> = std::result::Result<T, E>;
