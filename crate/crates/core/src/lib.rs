//! Truncated Toeplitz operators with distributional symbols `∂^α ∂̄^β μ` on the
//! Bergman space of the unit disk: matrix assembly, Berezin transforms, traces
//! by three routes, singular values and a Carleson bound probe.

pub mod berezin;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod measure;
pub mod numeric;
pub mod operator;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{BaseMeasure, SymbolSpec};
pub use operator::{assemble, TruncatedOperator};
