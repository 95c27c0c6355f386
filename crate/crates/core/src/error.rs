use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or non-finite caller input.
    #[error("invalid input: {0}")]
    Input(String),

    /// The assembled operators violate one of the structural hypotheses
    /// (symmetry, positivity, nonnegative damping).
    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis {
        hypothesis: &'static str,
        detail: String,
    },

    /// A region or count was requested outside the parameter range where it
    /// is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The bisection for the subordination constant could not bracket a root.
    #[error("subordination estimate failed: {0}")]
    Subordination(String),

    /// A dense factorization or eigensolver failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    /// Binary state dumps that do not match the expected layout.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(detail: impl Into<String>) -> Self {
        Error::Numerical(detail.into())
    }

    pub(crate) fn input(detail: impl Into<String>) -> Self {
        Error::Input(detail.into())
    }
}
