use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the ROI pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a numerical routine.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// Configuration inconsistent with itself or with the data.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Matrix or vector shapes that do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Malformed input file. `row` and `col` are 1-based positions in the file.
    #[error("{}: parse error at row {row}, column {col}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        msg: String,
    },

    /// Malformed input that is not tied to a cell (empty file, bad header).
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },

    /// A linear system too ill-conditioned to solve reliably.
    #[error("singular or ill-conditioned system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    /// A spectrum with no positive intensity was used where a direction is required.
    #[error("zero spectrum{}", label.as_ref().map(|l| format!(" '{l}'")).unwrap_or_default())]
    ZeroSpectrum { label: Option<String> },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
