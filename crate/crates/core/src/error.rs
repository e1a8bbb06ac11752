use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {msg} (got {value})")]
    Domain {
        op: &'static str,
        msg: &'static str,
        value: f64,
    },

    /// The root finder was handed an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("{op} did not converge within {iterations} iterations")]
    Convergence { op: &'static str, iterations: usize },

    /// Non-finite values encountered by quadrature or ODE integration.
    #[error("integration failure in {op}: {msg} at x = {at}")]
    Integration {
        op: &'static str,
        msg: &'static str,
        at: f64,
    },

    /// Operation not meaningful for the current ensemble state.
    #[error("invalid state: {0}")]
    State(String),

    /// Inconsistent input data (e.g. snapshot ids that do not match).
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: &'static str, value: impl Into<f64>) -> Self {
        Error::Domain {
            op,
            msg,
            value: value.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. } => 2,
            Error::Bracket { .. } | Error::Convergence { .. } | Error::Integration { .. } => 3,
            Error::State(_) | Error::Data(_) | Error::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
