use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A law failed its construction invariants (negative rate, probabilities
    /// not summing to one, forbidden coupling, ...).
    #[error("invalid law: {0}")]
    InvalidLaw(String),

    /// A caller violated an operation precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed textual input (law strings, sweep ranges, CLI values).
    #[error("parse error: {0}")]
    Parse(String),

    /// The requested evaluation method does not apply to the given law.
    #[error("method not applicable: {0}")]
    MethodNotApplicable(String),

    /// I/O failure, with the path that caused it.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
