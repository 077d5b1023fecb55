use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the evaluator.
    Domain { what: &'static str, value: f64 },
    /// A parameter or table failed validation.
    InvalidParameter(String),
    /// A documented precondition of an operation does not hold.
    Precondition(String),
    /// The operation does not apply to this nonlinearity or solution.
    Inapplicable(String),
    /// An iterative method gave up; carries whatever it had reached.
    NoConvergence(ConvergenceFailure),
}

/// Report attached to an iterative failure.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFailure {
    pub what: &'static str,
    pub iterations: usize,
    pub residual: f64,
    /// Last iterate (empty when the method has no meaningful iterate).
    pub last_iterate: Vec<f64>,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn inapplicable(msg: impl Into<String>) -> Self {
        Error::Inapplicable(msg.into())
    }

    pub(crate) fn no_convergence(
        what: &'static str,
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    ) -> Self {
        Error::NoConvergence(ConvergenceFailure {
            what,
            iterations,
            residual,
            last_iterate,
        })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what}: argument {value} out of range"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Inapplicable(msg) => write!(f, "inapplicable: {msg}"),
            Error::NoConvergence(r) => write!(
                f,
                "{} did not converge after {} iterations (residual {:e})",
                r.what, r.iterations, r.residual
            ),
        }
    }
}

impl core::error::Error for Error {}
