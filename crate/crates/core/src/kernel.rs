//! Orthonormal monomial basis `e_n(z) = √(n+1) zⁿ`, the reproducing kernel
//! `K_z(w) = (1 - z̄w)⁻²`, and the derivative kernel
//! `D^{α,β}(w) = ∂^α ∂̄^β (1 - w w̄)⁻²` that the trace formula pairs with μ.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{binomial, factorial, falling_factorial, rising_factorial, ComplexSum};

/// Evaluation points must satisfy `|w| <= 1 - BOUNDARY_MARGIN`.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Term cap for the `D^{α,β}` series.
pub const SERIES_TERM_CAP: usize = 100_000;

pub(crate) fn check_interior(w: Complex64) -> Result<()> {
    let r = w.norm();
    if !(r <= 1.0 - BOUNDARY_MARGIN) {
        return Err(Error::Boundary { modulus: r, limit: 1.0 - BOUNDARY_MARGIN });
    }
    Ok(())
}

/// Coefficient of `z^(m-α)` in `∂^α e_m`, i.e. `√(m+1) m!/(m-α)!`; zero for `m < α`.
pub fn basis_deriv_coeff(m: u64, alpha: u32) -> f64 {
    ((m + 1) as f64).sqrt() * falling_factorial(m, alpha)
}

pub fn basis_eval(n: u32, z: Complex64) -> Complex64 {
    f64::from(n + 1).sqrt() * z.powu(n)
}

/// `K_z(w) = (1 - z̄w)⁻²`.
pub fn kernel_eval(z: Complex64, w: Complex64) -> Complex64 {
    (1.0 - z.conj() * w).powi(-2)
}

/// `∂_w^α (1 - z̄w)⁻² = (α+1)! z̄^α (1 - z̄w)^(-(2+α))`.
pub fn kernel_deriv_eval(z: Complex64, w: Complex64, alpha: u32) -> Result<Complex64> {
    if !(z.norm() < 1.0 && w.norm() < 1.0) {
        return Err(Error::Contract(format!("kernel points must lie in the open disk: |z| = {}, |w| = {}", z.norm(), w.norm())));
    }
    let denom = 1.0 - z.conj() * w;
    if denom.norm() < 1e-15 {
        return Err(Error::NearSingular(denom.norm()));
    }
    Ok(factorial(alpha + 1) * z.conj().powu(alpha) * denom.powi(-(2 + alpha as i32)))
}

/// `D^{α,β}(w)` summed from its power series
/// `Σ_{j ≥ max(α,β)} (j+1) (j!/(j-α)!) (j!/(j-β)!) w^(j-α) w̄^(j-β)`.
///
/// Stops once the current term times the geometric tail factor drops below `tol`.
pub fn d_alpha_beta_eval(w: Complex64, alpha: u32, beta: u32, tol: f64) -> Result<Complex64> {
    check_interior(w)?;
    if !(tol > 0.0) {
        return Err(Error::Contract(format!("tolerance must be positive, got {tol}")));
    }
    let x = w.norm_sqr();
    let j0 = alpha.max(beta);
    let mut term = (f64::from(j0) + 1.0)
        * falling_factorial(u64::from(j0), alpha)
        * falling_factorial(u64::from(j0), beta)
        * w.powu(j0 - alpha)
        * w.conj().powu(j0 - beta);
    let mut acc = ComplexSum::new();
    let (a, b) = (f64::from(alpha), f64::from(beta));
    for step in 0..SERIES_TERM_CAP {
        acc.add(term);
        let j = f64::from(j0) + step as f64;
        // Coefficient ratio c_{j+1}/c_j, decreasing in j, so it bounds every later ratio.
        let ratio = (j + 2.0) / (j + 1.0) * (j + 1.0) / (j + 1.0 - a) * (j + 1.0) / (j + 1.0 - b);
        term *= ratio * x;
        let rho = ratio * x;
        if rho < 1.0 && term.norm() / (1.0 - rho) < tol {
            let v = acc.value();
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonConvergence { what: "derivative kernel series", achieved: f64::INFINITY });
            }
            return Ok(v);
        }
    }
    Err(Error::NonConvergence { what: "derivative kernel series", achieved: term.norm() })
}

/// `D^{α,β}(w)` from the finite Leibniz expansion
/// `(β+1)! Σ_{i ≤ min(α,β)} C(α,i) β!/(β-i)! (β+2)_{α-i} w^(β-i) w̄^(α-i) (1-|w|²)^(-2-α-β+i)`.
pub fn d_alpha_beta_closed(w: Complex64, alpha: u32, beta: u32) -> Complex64 {
    let one_minus = 1.0 - w.norm_sqr();
    let acc: ComplexSum = (0..=alpha.min(beta))
        .map(|i| {
            let coeff = binomial(alpha, i)
                * falling_factorial(u64::from(beta), i)
                * rising_factorial(f64::from(beta) + 2.0, alpha - i);
            coeff
                * w.powu(beta - i)
                * w.conj().powu(alpha - i)
                * one_minus.powi(-(2 + alpha as i32 + beta as i32) + i as i32)
        })
        .collect();
    factorial(beta + 1) * acc.value()
}

/// Partial sum `Σ_{n<N} e_n(z) conj(e_n(w))` of the kernel expansion.
pub fn kernel_partial(z: Complex64, w: Complex64, terms: u32) -> Complex64 {
    let x = z * w.conj();
    let mut pow = Complex64::new(1.0, 0.0);
    let mut acc = ComplexSum::new();
    for n in 0..terms {
        acc.add(f64::from(n + 1) * pow);
        pow *= x;
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_coefficients() {
        assert_eq!(basis_deriv_coeff(3, 0), 2.0);
        assert_eq!(basis_deriv_coeff(3, 2), 12.0);
        assert_eq!(basis_deriv_coeff(1, 2), 0.0);
    }

    #[test]
    fn kernel_derivative_values() {
        assert_eq!(kernel_deriv_eval(c(0.0, 0.0), c(0.0, 0.0), 0).unwrap(), c(1.0, 0.0));
        assert_eq!(kernel_deriv_eval(c(0.5, 0.0), c(0.0, 0.0), 1).unwrap(), c(1.0, 0.0));
        // 6 * 0.25 / 0.75^4
        let v = kernel_deriv_eval(c(0.5, 0.0), c(0.5, 0.0), 2).unwrap();
        assert_relative_eq!(v.re, 4.740740740740741, max_relative = 1e-14);
        assert!(kernel_deriv_eval(c(1.0, 0.0), c(0.0, 0.0), 0).is_err());
    }

    #[test]
    fn derivative_kernel_examples() {
        let tol = 1e-13;
        assert_relative_eq!(d_alpha_beta_eval(c(0.0, 0.0), 0, 0, tol).unwrap().re, 1.0);
        assert_relative_eq!(d_alpha_beta_eval(c(0.0, 0.0), 1, 1, tol).unwrap().re, 2.0);
        assert_eq!(d_alpha_beta_eval(c(0.0, 0.0), 1, 0, tol).unwrap(), c(0.0, 0.0));
        // 2 w̄ (1-|w|²)^-3 at w = 0.5
        let v = d_alpha_beta_eval(c(0.5, 0.0), 1, 0, tol).unwrap();
        assert_relative_eq!(v.re, 1.0 / 0.421875, max_relative = 1e-12);
    }

    #[test]
    fn derivative_kernel_boundary_and_budget() {
        assert!(matches!(d_alpha_beta_eval(c(0.9999999, 0.0), 0, 0, 1e-10), Err(Error::Boundary { .. })));
        assert!(matches!(
            d_alpha_beta_eval(c(1.0 - 2e-6, 0.0), 3, 3, 1e-12),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn one_one_kernel_matches_rational_form() {
        for i in 0..=9 {
            for k in 0..8 {
                let r = 0.1 * f64::from(i);
                let w = Complex64::from_polar(r, f64::from(k) * 0.785);
                let x = r * r;
                let expected = 2.0 * (1.0 + 2.0 * x) / (1.0 - x).powi(4);
                let got = d_alpha_beta_eval(w, 1, 1, 1e-12).unwrap();
                assert!((got.re - expected).abs() <= 1e-12 * expected.max(1.0) + 1e-12, "{r}: {got} vs {expected}");
                assert!(got.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_series() {
        for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 3), (3, 3), (4, 0)] {
            for w in [c(0.0, 0.0), c(0.3, -0.2), c(-0.5, 0.4), c(0.1, 0.85)] {
                let s = d_alpha_beta_eval(w, a, b, 1e-13).unwrap();
                let cf = d_alpha_beta_closed(w, a, b);
                assert!((s - cf).norm() <= 1e-11 * cf.norm().max(1.0), "({a},{b}) at {w}: {s} vs {cf}");
            }
        }
    }

    #[test]
    fn kernel_expansion_reproduces_kernel() {
        let z = Complex64::from_polar(0.8, 0.3);
        let w = Complex64::from_polar(0.8, -1.1);
        for n in [10u32, 40, 120] {
            let tail: f64 = (n..2000).map(|k| f64::from(k + 1) * 0.64f64.powi(k as i32)).sum();
            let err = (kernel_partial(z, w, n) - kernel_eval(w, z)).norm();
            assert!(err <= tail * (1.0 + 1e-9) + 1e-13, "N={n}: {err} > {tail}");
        }
        assert_relative_eq!(
            basis_eval(2, c(0.5, 0.0)).re * basis_eval(2, c(0.5, 0.0)).re,
            3.0 * 0.0625,
            max_relative = 1e-15
        );
    }

    proptest! {
        #[test]
        fn derivative_kernel_conjugate_symmetry(r in 0.0..0.9f64, th in 0.0..6.3f64, a in 0u32..4, b in 0u32..4) {
            let w = Complex64::from_polar(r, th);
            let ab = d_alpha_beta_eval(w, a, b, 1e-13).unwrap();
            let ba = d_alpha_beta_eval(w, b, a, 1e-13).unwrap();
            prop_assert!((ab - ba.conj()).norm() <= 1e-13 * ab.norm().max(1.0));
        }
    }
}
