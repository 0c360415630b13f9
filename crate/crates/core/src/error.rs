use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid drive profile: {0}")]
    InvalidProfile(String),

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    Accuracy { estimate: f64, tolerance: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    Stiffness { t: f64, h: f64 },

    #[error("unimodularity drift |det - 1| = {drift:e} exceeds limit {limit:e}")]
    Consistency { drift: f64, limit: f64 },

    #[error("propagator violates |alpha|^2 - |beta|^2 = 1 by {violation:e}")]
    InconsistentPropagator { violation: f64 },

    #[error("[U_I]_22 vanishes; the determinant ratio is singular")]
    SingularPropagator,

    #[error("argument of the CTP logarithm vanishes")]
    DegeneratePair,

    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
