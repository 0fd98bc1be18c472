use thiserror::Error;

use crate::jet::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("s = {s} outside the profile domain |s| < {b0}")]
    OutOfDomain { s: f64, b0: f64 },
    #[error("invalid phi profile: {0}")]
    InvalidPhi(String),
    #[error("degenerate metric: {0}")]
    Degenerate(String),
    #[error("phi(b cos t) <= 0 at a quadrature node (b = {b})")]
    QuadratureFailure { b: f64 },
    #[error("Riemannian metric is singular or not positive definite at the probe point")]
    SingularMetric,
    #[error("beta vanishes at the probe point; only the Riemannian branch applies")]
    ZeroBeta,
    #[error("s^2 = {s2} is not below b^2 = {b2}")]
    OutOfCone { s2: f64, b2: f64 },
    #[error("fundamental tensor ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { got: usize, need: usize },
    #[error("least-squares design matrix is rank deficient")]
    RankDeficient,
    #[error("angular metric degenerate on the orthogonal complement of y")]
    DegenerateAngular,
    #[error("expression is not quadratic in b^2 (4th node off by {0:e} relative)")]
    NotPolynomial(f64),
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }
}
