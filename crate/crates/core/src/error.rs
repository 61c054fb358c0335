use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A measure, index or symbol violates its documented invariants.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested functional is not defined for this measure or distribution.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An evaluation point is too close to the unit circle.
    #[error("point {modulus} is too close to the boundary (limit {limit})")]
    Boundary { modulus: f64, limit: f64 },

    #[error("near-singular kernel evaluation: |1 - conj(z) w| = {0:e}")]
    NearSingular(f64),

    /// A series, sweep or quadrature did not reach its tolerance within budget.
    #[error("{what} did not converge (achieved {achieved:e})")]
    NonConvergence { what: &'static str, achieved: f64 },

    /// The weighted boundary integral that gates trace-class membership diverges.
    #[error("not trace class: boundary integrand has non-integrable endpoint exponent {exponent}")]
    NotTraceClass { exponent: f64 },

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    /// A decay-fit window contains zero or underflowed singular values, or is too short.
    #[error("invalid fit window: {0}")]
    Window(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Contract(_) => "contract",
            Error::Unsupported(_) => "unsupported",
            Error::Boundary { .. } => "boundary",
            Error::NearSingular(_) => "near_singular",
            Error::NonConvergence { .. } => "non_convergence",
            Error::NotTraceClass { .. } => "not_trace_class",
            Error::ResourceCap(_) => "resource_cap",
            Error::Window(_) => "window",
            Error::Config(_) => "config",
        }
    }
}
