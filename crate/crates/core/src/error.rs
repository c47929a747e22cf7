use thiserror::Error;

/// Failures raised by the solver.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("branch error: {0}")]
    Branch(String),

    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    Quadrature {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("no sign change while bracketing the stationary root; probes (eps - mc^2, h): {probes:?}")]
    BracketFailure { probes: Vec<(f64, f64)> },

    #[error("no interior extremum: {0}")]
    NoInteriorExtremum(String),

    #[error("finite-difference curvature is noise dominated (estimate {estimate:e}, noise {noise:e})")]
    StepSize { estimate: f64, noise: f64 },

    #[error("matrix is not positive definite (condition estimate {condition:e})")]
    NotPositiveDefinite { condition: f64 },

    #[error("{stage} did not converge; iterate trace: {trace:?}")]
    NonConvergence { stage: String, trace: Vec<f64> },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
