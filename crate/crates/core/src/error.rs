use thiserror::Error;

/// Failure modes shared by every module of the crate.
///
/// Each variant maps to a distinct process exit code through [`Error::code`],
/// which the command-line front end forwards unchanged.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid weight table: {0}")]
    InvalidWeight(String),

    #[error("out of policy: {0}")]
    Policy(String),

    #[error("covariance is not positive semidefinite: eigenvalue {eigenvalue:e} below tolerance {tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("limit did not stabilize: {0}")]
    NoConvergence(String),

    #[error("critical point counting failed for field {field}: {reason}")]
    Counting { field: u64, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for this error kind. Zero is reserved for success
    /// and one for argument-parsing failures reported by the CLI parser.
    pub fn code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::InvalidWeight(_) => 3,
            Error::Policy(_) => 4,
            Error::NotPsd { .. } => 5,
            Error::Singular(_) => 6,
            Error::Quadrature(_) => 7,
            Error::NoConvergence(_) => 8,
            Error::Counting { .. } => 9,
            Error::Io(_) => 10,
        }
    }

    /// Short machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidWeight(_) => "invalid_weight",
            Error::Policy(_) => "policy",
            Error::NotPsd { .. } => "not_psd",
            Error::Singular(_) => "singular",
            Error::Quadrature(_) => "quadrature",
            Error::NoConvergence(_) => "no_convergence",
            Error::Counting { .. } => "counting",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
