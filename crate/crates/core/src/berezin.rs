//! Berezin transform `T̃(z) = ⟨T k_z, k_z⟩` with the normalized kernel
//! `k_z(w) = (1-|z|²)(1 - z̄w)⁻²`, evaluated from the symbol (series route) or
//! from an assembled truncation (matrix route), plus integration against the
//! Möbius-invariant measure `dλ = (1-|z|²)⁻² dA`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::check_interior;
use crate::measure::{BaseMeasure, SymbolSpec};
use crate::numeric::{factorial, ln_beta, parity_sign, serde_complex, ComplexSum};
use crate::operator::TruncatedOperator;
use crate::quadrature::{angular_average, graded_integral, GradedConfig};

/// Term cap for the Berezin double series (after radial reduction it is one-dimensional).
pub const BEREZIN_TERM_CAP: usize = 5_000_000;

pub const DEFAULT_SERIES_TOL: f64 = 1e-10;
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-8;

/// Graded panels stop at `1 - |z|² = 2^-18`, inside the `|z| <= 1 - 1e-6` evaluation limit.
pub const INVARIANT_MAX_PANELS: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BerezinRoute {
    Series,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerezinSample {
    #[serde(with = "serde_complex")]
    pub z: Complex64,
    #[serde(with = "serde_complex")]
    pub value: Complex64,
    pub route: BerezinRoute,
    pub est_error: f64,
}

/// Sums `Σ_p c_p x^p` from the coefficient ratio `c_{p+1}/c_p`, stopping when the
/// geometric-ratio tail estimate (scaled by `scale`) falls below `tol`.
fn ratio_series(
    first: f64,
    x: f64,
    ratio: impl Fn(f64) -> f64,
    scale: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mut term = first;
    let mut acc = crate::numeric::CompensatedSum::new();
    if term == 0.0 || scale == 0.0 {
        return Ok((0.0, 0.0));
    }
    for p in 0..BEREZIN_TERM_CAP {
        acc.add(term);
        let r = ratio(p as f64);
        term *= r * x;
        let rho = x * r.max(1.0);
        if rho < 1.0 {
            let tail = term.abs() / (1.0 - rho) * scale;
            if tail < tol {
                return Ok((acc.value(), tail));
            }
        }
    }
    Err(Error::NonConvergence { what: "Berezin series", achieved: term.abs() * scale })
}

/// `T̃(z)` for a single atomic component; returns `(value, tail bound)`.
fn atomic_series(alpha: u32, beta: u32, base: &BaseMeasure, z: Complex64, tol: f64) -> Result<(Complex64, f64)> {
    let x = z.norm_sqr();
    let one_minus = 1.0 - x;
    let sign = parity_sign(alpha + beta);
    let (a, b) = (f64::from(alpha), f64::from(beta));
    let prefactor =
        sign * factorial(alpha + 1) * factorial(beta + 1) * one_minus * one_minus * z.conj().powu(alpha) * z.powu(beta);
    match base {
        BaseMeasure::PointMass { z0 } => {
            let left = (1.0 - z.conj() * z0).powi(-(2 + alpha as i32));
            let right = (1.0 - z * z0.conj()).powi(-(2 + beta as i32));
            let v = prefactor * left * right;
            Ok((v, 4.0 * f64::EPSILON * v.norm()))
        }
        BaseMeasure::RadialPower { s, a: w } => {
            // S = Σ_p C(p+α+1,p) C(p+β+1,p) x^p B(p+w+1, s+1)
            let first = ln_beta(w + 1.0, s + 1.0).exp();
            let ratio = |p: f64| (p + a + 2.0) * (p + b + 2.0) / ((p + 1.0) * (p + 1.0)) * (p + w + 1.0) / (p + w + s + 2.0);
            let (sum, tail) = ratio_series(first, x, ratio, prefactor.norm(), tol)?;
            Ok((prefactor * sum, tail))
        }
        BaseMeasure::CircleUniform { r0 } => {
            let y = x * r0 * r0;
            let ratio = |p: f64| (p + a + 2.0) * (p + b + 2.0) / ((p + 1.0) * (p + 1.0));
            let (sum, tail) = ratio_series(1.0, y, ratio, prefactor.norm(), tol)?;
            Ok((prefactor * sum, tail))
        }
        BaseMeasure::CircleRadialDerivative { r0 } => {
            if (alpha, beta) != (0, 0) {
                return Err(Error::Unsupported("radial-derivative pairing needs alpha = beta = 0".into()));
            }
            // -(1-x)² Σ_{p≥1} (p+1)² 2p x^p r0^(2p-1); start the sum at p = 1.
            let y = x * r0 * r0;
            let scale = one_minus * one_minus;
            let first = 4.0 * 2.0 * r0 * x;
            let ratio = |q: f64| {
                let p = q + 1.0;
                (p + 2.0) * (p + 2.0) * (p + 1.0) / ((p + 1.0) * (p + 1.0) * p)
            };
            let (sum, tail) = ratio_series(first, y, ratio, scale, tol)?;
            Ok((Complex64::new(-scale * sum, 0.0), tail))
        }
        BaseMeasure::Combination { .. } => unreachable!("combinations are expanded by the caller"),
    }
}

/// Berezin transform from the symbol's moment series.
pub fn berezin_series(symbol: &SymbolSpec, z: Complex64, tol: f64) -> Result<BerezinSample> {
    check_interior(z)?;
    if !(tol > 0.0) {
        return Err(Error::Contract(format!("tolerance must be positive, got {tol}")));
    }
    let terms = symbol.base.terms();
    let share = tol / terms.len() as f64;
    let mut acc = ComplexSum::new();
    let mut err = 0.0;
    for (c, m) in terms {
        if c.norm() == 0.0 {
            continue;
        }
        let (v, e) = atomic_series(symbol.alpha, symbol.beta, m, z, share / c.norm())?;
        acc.add(c * v);
        err += c.norm() * e;
    }
    Ok(BerezinSample { z, value: acc.value(), route: BerezinRoute::Series, est_error: err })
}

/// Berezin transform of a truncation: `Σ_{n,m} T[n][m] a_m conj(a_n)` with
/// `a_n = (1-|z|²) √(n+1) z̄ⁿ`.
pub fn berezin_matrix(op: &TruncatedOperator, z: Complex64) -> Result<BerezinSample> {
    check_interior(z)?;
    let n = op.dim;
    let x = z.norm_sqr();
    let one_minus = 1.0 - x;
    let mut coeffs = Vec::with_capacity(n);
    let mut pow = Complex64::new(1.0, 0.0);
    for k in 0..n {
        coeffs.push(one_minus * ((k + 1) as f64).sqrt() * pow);
        pow *= z.conj();
    }
    let mut acc = ComplexSum::new();
    for (row, an) in coeffs.iter().enumerate() {
        let inner: ComplexSum = op.entries.row(row).iter().zip(&coeffs).map(|(t, am)| t * am).collect();
        acc.add(an.conj() * inner.value());
    }
    // ‖k_z - P_N k_z‖² = x^N (N + 1 - N x); the full operator norm is proxied by ‖T_N‖_F.
    let nf = n as f64;
    let tau = (x.powf(nf) * (nf + 1.0 - nf * x)).max(0.0).sqrt();
    let opnorm = op.entries.frobenius_norm();
    let roundoff = 16.0 * f64::EPSILON * nf * opnorm;
    Ok(BerezinSample {
        z,
        value: acc.value(),
        route: BerezinRoute::Matrix,
        est_error: opnorm * (2.0 * tau + tau * tau) + roundoff,
    })
}

/// Weighted Berezin transform `B_α f(z)` of the radial function
/// `f(w) = (1-|w|²)^m_exp |w|^(2 a_exp)`:
/// `(α+1)(1-|z|²)^(2+α) Σ_p C(p+α+1,p)² |z|^(2p) ∫₀¹ f(√t) t^p (1-t)^α dt`.
pub fn weighted_berezin_radial(m_exp: f64, a_exp: f64, alpha: u32, z: Complex64, tol: f64) -> Result<f64> {
    check_interior(z)?;
    let a = f64::from(alpha);
    if !(m_exp + a > -1.0 && a_exp > -1.0) {
        return Err(Error::Contract(format!(
            "f is not integrable against the weight: m_exp + alpha = {}, a_exp = {a_exp}",
            m_exp + a
        )));
    }
    let x = z.norm_sqr();
    let prefactor = (a + 1.0) * (1.0 - x).powf(2.0 + a);
    let first = ln_beta(a_exp + 1.0, m_exp + a + 1.0).exp();
    let ratio = |p: f64| {
        let b = (p + a + 2.0) / (p + 1.0);
        b * b * (p + a_exp + 1.0) / (p + a_exp + m_exp + a + 2.0)
    };
    let (sum, _) = ratio_series(first, x, ratio, prefactor, tol)?;
    Ok(prefactor * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantIntegral {
    #[serde(with = "serde_complex")]
    pub value: Complex64,
    pub error: f64,
    /// Extrapolated contribution of the annulus the panels do not reach.
    #[serde(with = "serde_complex")]
    pub boundary_tail: Complex64,
    pub panels: usize,
}

/// `∫_D sampler(z) dλ(z)` with `dλ = (1-|z|²)⁻² dA`.
///
/// In `t = |z|²` the area measure is `dt`; the `t`-integral uses graded 16-point
/// panels toward `t = 1`. With `radial_hint` the sampler is evaluated on the
/// positive real axis only; otherwise each ring is averaged with an adaptive
/// periodic trapezoid rule.
pub fn invariant_integral<F>(sampler: F, radial_hint: bool, tol: f64) -> Result<InvariantIntegral>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(tol > 0.0) {
        return Err(Error::Contract(format!("tolerance must be positive, got {tol}")));
    }
    let ring_tol = tol * 1e-2;
    let integrand = |u: f64| -> Result<Complex64> {
        let r = (1.0 - u).sqrt();
        let ring = if radial_hint {
            sampler(Complex64::new(r, 0.0))?
        } else {
            angular_average(|theta| sampler(Complex64::from_polar(r, theta)), 16, ring_tol * u * u)?
        };
        Ok(ring / (u * u))
    };
    let cfg = GradedConfig { panel_tol: tol / 10.0, max_panels: INVARIANT_MAX_PANELS };
    let res = graded_integral(integrand, cfg)?;
    Ok(InvariantIntegral { value: res.value, error: res.error, boundary_tail: res.boundary_tail, panels: res.panels })
}

/// `‖z (1 - z z̄0)⁻³‖` in the Bergman norm from the power series
/// `Σ_p C(p+2,2)² |z0|^(2p) / (p+2)`.
pub fn norm_of_shifted_cube(z0: Complex64, tol: f64) -> Result<f64> {
    check_interior(z0)?;
    let x = z0.norm_sqr();
    let ratio = |p: f64| {
        let b = (p + 3.0) / (p + 1.0);
        b * b * (p + 2.0) / (p + 3.0)
    };
    let (sum, _) = ratio_series(0.5, x, ratio, 1.0, tol)?;
    Ok(sum.sqrt())
}
