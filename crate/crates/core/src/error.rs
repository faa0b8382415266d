use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter is outside its admissible set.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The result would leave the representable floating-point range.
    #[error("range error: {message} (largest safe argument {largest_safe})")]
    Range { message: String, largest_safe: f64 },

    /// A certified truncation bound could not be met.
    #[error("truncation bound {delta} not reachable within {cap} indices")]
    Bound { delta: f64, cap: u64 },

    /// A numerical method could not reach the requested accuracy.
    #[error("requested accuracy {requested} not reached (achieved {achieved})")]
    Accuracy { requested: f64, achieved: f64 },

    /// An iterative solver failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A caller-side contract was violated (unsorted input, too few samples).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Internal consistency check failed.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("usage error in field `{field}`: {message}")]
    Usage { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn usage(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Usage {
            field: field.into(),
            message: message.into(),
        }
    }
}
