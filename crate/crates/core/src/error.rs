use thiserror::Error;

/// Errors raised by the library. The variants map onto the harness exit codes:
/// `Input`/`Range`/`Parse`/`Unsupported` are validation failures, `Resource`
/// is a resource failure and `FitFailure` is reported as a validation failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("value {value} out of range [{lo}, {hi}] ({context})")]
    Range {
        value: f64,
        lo: f64,
        hi: f64,
        context: String,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource limit: {msg} (estimated {required_bytes} bytes)")]
    Resource { msg: String, required_bytes: u128 },
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("fit failed: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
