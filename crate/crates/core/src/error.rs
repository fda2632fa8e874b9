use thiserror::Error;

/// Errors produced by the bound, decomposition and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A theorem hypothesis (validity gate) does not hold for the inputs.
    #[error("validity gate failed: {0}")]
    Validity(String),

    /// The matrix is not positive definite; `pivot` is the zero-based index
    /// (in the permuted order) of the first pivot that fell below tolerance.
    #[error("matrix is not positive definite: pivot {pivot} = {value:e} is below tolerance {tolerance:e}")]
    NotPositiveDefinite {
        pivot: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
