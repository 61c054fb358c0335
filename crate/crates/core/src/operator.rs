//! Matrix truncations of Toeplitz operators with symbol `∂^α ∂̄^β μ`.
//!
//! Convention: `entries[(n, m)] = F[e_m, e_n] = ⟨T e_m, e_n⟩`, row index is the
//! output basis vector, column index the input.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::measure::{moment, BaseMeasure, SymbolSpec};
use crate::numeric::{falling_factorial, ComplexSum};

/// Largest truncation dimension accepted by [`assemble`].
pub const MAX_DIM: usize = 4096;

/// Default relative accuracy attached to assembled entries.
pub const ASSEMBLY_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub dim: usize,
    pub entries: CMatrix,
    pub symbol: SymbolSpec,
    pub assembly_tol: f64,
    pub hermitian: bool,
    /// Nonzero only where `m - α = n - β`.
    pub banded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixSummary {
    pub dim: usize,
    pub hermitian: bool,
    pub banded: bool,
    pub assembly_tol: f64,
}

impl TruncatedOperator {
    pub fn summary(&self) -> MatrixSummary {
        MatrixSummary { dim: self.dim, hermitian: self.hermitian, banded: self.banded, assembly_tol: self.assembly_tol }
    }
}

/// `F[e_m, e_n]` for a single atomic measure or distribution.
fn atomic_entry(alpha: u32, beta: u32, base: &BaseMeasure, n: u64, m: u64) -> Result<Complex64> {
    match base {
        BaseMeasure::CircleRadialDerivative { r0 } => {
            if (alpha, beta) != (0, 0) {
                return Err(Error::Unsupported(
                    "radial-derivative pairing is implemented for alpha = beta = 0 only".into(),
                ));
            }
            if n != m || n == 0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            // -(d/dr)[(n+1) r^(2n)] at r0
            let nf = n as f64;
            Ok(Complex64::new(-(nf + 1.0) * 2.0 * nf * r0.powi(2 * n as i32 - 1), 0.0))
        }
        BaseMeasure::Combination { .. } => unreachable!("combinations are expanded by the caller"),
        _ => {
            if m < u64::from(alpha) || n < u64::from(beta) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let sign = crate::numeric::parity_sign(alpha + beta);
            // Symmetric in (n, m) and exact on the diagonal.
            let norms = ((m + 1) as f64 * (n + 1) as f64).sqrt();
            let scale = norms * (falling_factorial(m, alpha) * falling_factorial(n, beta));
            Ok(sign * scale * moment(base, m - u64::from(alpha), n - u64::from(beta))?)
        }
    }
}

/// `⟨T_F e_m, e_n⟩ = (-1)^(α+β) ∫ ∂^α e_m conj(∂^β e_n) dμ`.
pub fn entry(symbol: &SymbolSpec, n: u64, m: u64) -> Result<Complex64> {
    match &symbol.base {
        BaseMeasure::Combination { terms } => {
            let mut acc = ComplexSum::new();
            for (c, t) in terms {
                acc.add(c * atomic_entry(symbol.alpha, symbol.beta, t, n, m)?);
            }
            Ok(acc.value())
        }
        base => atomic_entry(symbol.alpha, symbol.beta, base, n, m),
    }
}

/// The `N × N` truncation in the orthonormal monomial basis.
pub fn assemble(symbol: &SymbolSpec, dim: usize) -> Result<TruncatedOperator> {
    symbol.validate()?;
    if dim == 0 {
        return Err(Error::Contract("dimension must be positive".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::ResourceCap(format!("dimension {dim} exceeds {MAX_DIM}")));
    }
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|n| (0..dim).map(|m| entry(symbol, n as u64, m as u64)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let entries = CMatrix::from_rows(rows);
    let hermitian = entries.is_hermitian();
    let (a, b) = (i64::from(symbol.alpha), i64::from(symbol.beta));
    let banded = (0..dim).all(|n| {
        (0..dim).all(|m| m as i64 - a == n as i64 - b || entries[(n, m)] == Complex64::new(0.0, 0.0))
    });
    Ok(TruncatedOperator { dim, entries, symbol: symbol.clone(), assembly_tol: ASSEMBLY_TOL, hermitian, banded })
}

/// Symbol of the adjoint operator: orders swapped, coefficients conjugated.
pub fn adjoint_symbol(symbol: &SymbolSpec) -> SymbolSpec {
    SymbolSpec { alpha: symbol.beta, beta: symbol.alpha, base: symbol.base.conj() }
}
