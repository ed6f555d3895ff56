use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by the whole crate.
///
/// Two families matter to callers: argument errors (a precondition on the
/// inputs was violated) and domain errors (the inputs were well formed but the
/// requested quantity is undefined on them, e.g. conditioning on an outcome of
/// probability zero). The CLI maps the former to exit code 2 and the latter to
/// exit code 3; see [`Error::is_domain`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("probability table sums to {sum:.17}, expected 1 within {tol:e}")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("value {value} of `{variable}` has zero probability")]
    ZeroProbabilityValue { variable: String, value: u32 },

    #[error("target outcome {value} of `{variable}` has zero empirical or exact probability")]
    ZeroProbabilityOutcome { variable: String, value: u32 },

    #[error("exact I^({k}) is zero; the normalized deviation is undefined (pick a different model seed)")]
    ZeroExactInformation { k: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// `true` for errors where the computation is undefined on otherwise valid
    /// inputs, as opposed to misuse of the API.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::ZeroProbabilityValue { .. }
                | Error::ZeroProbabilityOutcome { .. }
                | Error::ZeroExactInformation { .. }
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
