use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, error estimate {abs_error:e}")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        abs_error: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("the Jeffreys prior of lambda is undefined at 0: the base density has no finite second moment")]
    UndefinedAtZero,

    #[error("MCMC initialization failed: {0}")]
    Initialization(String),

    #[error(
        "unreliable importance-sampling estimate: effective sample size {ess:.1} of {draws} draws"
    )]
    UnreliableEstimate { ess: f64, draws: usize },

    #[error("posterior propriety is not guaranteed: {0}")]
    NotProper(String),

    #[error("{failed} of {total} replications failed")]
    Harness { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
