use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by field, bundle and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("metric is not hermitian at s = {node} (relative residual {residual:e})")]
    NotHermitian { node: Complex64, residual: f64 },

    #[error("metric is not positive definite at s = {node} (smallest eigenvalue {eigenvalue:e})")]
    NotPositive { node: Complex64, eigenvalue: f64 },

    #[error("metric factorization failed at s = {0}")]
    Factorization(Complex64),

    #[error("Taylor surrogate residual {residual:e} exceeds tolerance {tolerance:e}; domain too large for degree {degree}")]
    SurrogateResidual {
        residual: f64,
        tolerance: f64,
        degree: usize,
    },

    #[error("curvature self-adjointness residual {residual:e} at s = {node} exceeds {tolerance:e}")]
    SelfAdjointness {
        node: Complex64,
        residual: f64,
        tolerance: f64,
    },

    #[error("finite-difference stencil point {0} lies outside the declared domain")]
    StencilOutsideDomain(Complex64),

    #[error("non-finite sample at z = {0}")]
    NonFinite(Complex64),

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("section vanishes at s = {0}")]
    VanishingSection(Complex64),

    #[error("operator norm vanishes at s = {0}")]
    VanishingNorm(Complex64),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("no interior nodes available: {0}")]
    EmptyInterior(String),

    #[error("negative fiber integrand at s = {0}")]
    NegativeIntegrand(Complex64),

    #[error("unknown gallery entry `{name}`; available: {}", available.join(", "))]
    UnknownGallery { name: String, available: Vec<String> },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
