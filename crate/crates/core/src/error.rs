use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("basis dimension {requested} exceeds the configured cap {cap}")]
    BasisOverflow { requested: usize, cap: usize },

    #[error("operator/basis mismatch: {0}")]
    Mismatch(String),

    #[error("site {site} outside the lattice [{min}, {max}]")]
    SiteOutOfRange { site: i64, min: i64, max: i64 },

    #[error("wave packet support violation: {0}")]
    Support(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("propagation error budget exceeded: {0}")]
    StepBudget(String),

    #[error("wave packet reached the lattice boundary at t = {time}: edge weight {weight:e}")]
    BoundaryContact { time: f64, weight: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("singular one-photon propagator at E = {energy} (bound state in the continuum)")]
    SingularPropagator { energy: f64 },

    #[error("pole at {pole} lies within {distance:e} of the real integration axis; use the principal-value path")]
    PoleOnContour { pole: String, distance: f64 },

    #[error("empty fluorescence window")]
    EmptyWindow,

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
