use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operator set violates a normalization or positivity constraint.
    #[error("validation error: {what} (residual {residual:.3e})")]
    Validation { what: String, residual: f64 },

    /// A formula hit a vanishing denominator.
    #[error("singularity in {what}: denominator {denominator:.3e}")]
    Singularity { what: String, denominator: f64 },

    /// A finite-difference stencil crosses a branch boundary.
    #[error("stencil [{lo}, {hi}] crosses the branch boundary at {boundary}")]
    BranchCrossing { lo: f64, hi: f64, boundary: f64 },

    /// Estimation from an empty set of counts.
    #[error("no coincidences registered")]
    EmptyCounts,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
