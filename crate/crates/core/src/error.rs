//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the library.
///
/// `InvalidParameter` and `MalformedInput` indicate caller/config problems and
/// map to exit code 2 in the CLI; `NumericalFailure` indicates a solver that
/// did not converge or produced non-finite values and maps to exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A node, row, or column index is outside the valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// An input file or buffer could not be parsed.
    #[error("malformed input: {0}")]
    MalformedInput(String),

    /// An iterative numerical routine failed; `residual` carries the
    /// remaining error when the routine can quantify it.
    #[error("numerical failure: {msg}")]
    NumericalFailure {
        msg: String,
        residual: Option<f64>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn malformed(msg: impl Into<String>) -> Self {
        Error::MalformedInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>, residual: Option<f64>) -> Self {
        Error::NumericalFailure {
            msg: msg.into(),
            residual,
        }
    }
}
