use std::path::PathBuf;

/// Error type shared by the whole crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar argument or model parameter failed validation.
    #[error("invalid {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// An operation requiring data was given an empty slice.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// The closed-form threshold is undefined because the logarithm
    /// argument is <= 1 (dense regime: no positive cut exists).
    #[error(
        "no positive threshold: log argument {0} <= 1; \
         requires delta0*(1-p)/(deltaA*p) * sqrt(1 + tau_sq/sigma0_sq) > 1"
    )]
    NoPositiveThreshold(f64),

    /// Two sequences that must have equal length did not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Configuration file problems (parse errors, invalid cells).
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
