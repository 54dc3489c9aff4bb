use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("objective `{objective}` returned a non-finite value {value} at {point:?}")]
    NonFinite {
        objective: String,
        point: Vec<f64>,
        value: f64,
    },

    #[error("unknown objective `{name}`; valid names: {}", valid.join(", "))]
    UnknownObjective { name: String, valid: Vec<String> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective `{0}` has no analytic gradient")]
    MissingGradient(String),

    #[error("quadrature did not converge: estimated error {achieved:e} exceeds tolerance {tol:e} after {evaluations} evaluations")]
    QuadratureBudget {
        achieved: f64,
        tol: f64,
        evaluations: usize,
    },

    #[error("tensor quadrature supports n <= {max}, got n = {n}; use Monte Carlo mode instead")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("true gradient is zero; relative error is undefined")]
    ZeroGradient,

    #[error("gradient at the starting point of `{0}` is zero; function excluded from buckets")]
    ZeroInitialGradient(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
