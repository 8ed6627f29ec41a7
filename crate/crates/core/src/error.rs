use thiserror::Error;

/// Errors raised by the criterion, chain, oracle and matrix routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the requested operation.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The parameter sits on (or within the rejection band of) a singular point.
    #[error("singular parameter: {0}")]
    Singular(String),

    /// A bracketing scan found no sign change.
    #[error("no sign change bracketing a root: {0}")]
    Bracket(String),

    /// The ratio denominator vanished (all-zero input).
    #[error("undefined ratio: input sequence is identically zero")]
    UndefinedRatio,

    /// Stolarsky mean requested at index 0 or 1.
    #[error("unsupported Stolarsky index {0}")]
    UnsupportedIndex(f64),

    /// Stolarsky mean requested at equal arguments.
    #[error("degenerate mean arguments: x = y = {0}")]
    DegenerateArguments(f64),

    /// Two input sequences have incompatible lengths.
    #[error("length mismatch: {0}")]
    Length(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
