use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not reach rel_tol {rel_tol:e} after {nodes} nodes (last change {change:e})")]
    NonConvergence {
        rel_tol: f64,
        nodes: usize,
        change: f64,
    },

    #[error("integrand is not finite or density is not positive at {location}")]
    NonFiniteIntegrand { location: String },

    #[error("finite-difference step {step:e} is below the resolvable scale {floor:e}")]
    StepUnderflow { step: f64, floor: f64 },

    #[error("parameter outside admissible domain: {0}")]
    Domain(String),

    #[error("arc length exceeded {limit:e} during refinement")]
    Divergent { limit: f64 },

    #[error("finite-difference derivatives unstable at lambda = {lambda} (relative change {change:e})")]
    DerivativeInstability { lambda: f64, change: f64 },

    #[error("extrapolation unstable: estimated error {error:e} for limit {value}")]
    ExtrapolationUnstable { value: f64, error: f64 },

    #[error("geodesic step rejected at step {step}: left the working interval")]
    StepRejected { step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
