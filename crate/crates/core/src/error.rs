use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The operation is undefined for a zero test statistic.
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    /// The requested power exceeds what any relative sample size can reach.
    #[error("target power {target} is infeasible; supremum is {supremum}")]
    Infeasible { target: f64, supremum: f64 },

    /// The requested power lies below every attainable value.
    #[error("target power {target} lies below the attainable minimum {infimum}")]
    BelowMinimum { target: f64, infimum: f64 },

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("dataset invariant violated:\n{}", .0.join("\n"))]
    Invariant(Vec<String>),

    #[error("study `{study}` is missing `{field}`")]
    MissingField { study: String, field: &'static str },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
