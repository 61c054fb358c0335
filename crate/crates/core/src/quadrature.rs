//! Composite Gauss–Legendre quadrature on a dyadically graded mesh.
//!
//! `graded_integral` integrates `g(u)` over `(0, 1]` with panels
//! `[2^-(j+1), 2^-j]`, so an endpoint singularity or slow decay at `u = 0`
//! is resolved geometrically. The piece `(0, u_min)` that the panels do not
//! cover is extrapolated from the ratio of the last panel contributions and
//! reported separately.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::ComplexSum;

pub const PANEL_ORDER: usize = 16;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule.reverse();
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

fn panel_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// `∫_a^b f` with the 16-point rule.
pub fn gl_panel<F>(f: &F, a: f64, b: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = ComplexSum::new();
    for &(x, w) in panel_rule() {
        acc.add(w * half * f(mid + half * x)?);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy)]
pub struct GradedConfig {
    /// Stop once a panel contributes less than this (absolute).
    pub panel_tol: f64,
    /// Panels stop at `u = 2^-max_panels`.
    pub max_panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedResult {
    /// Resolved panels plus the extrapolated tail.
    pub value: Complex64,
    /// Panel-refinement error plus the uncertainty of the tail extrapolation.
    pub error: f64,
    /// Extrapolated contribution of `(0, u_min)`.
    pub boundary_tail: Complex64,
    pub panels: usize,
}

/// `∫₀¹ g(u) du`, graded toward `u = 0`.
pub fn graded_integral<F>(g: F, cfg: GradedConfig) -> Result<GradedResult>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let mut contributions: Vec<Complex64> = Vec::new();
    let mut total = ComplexSum::new();
    let mut error = 0.0;
    for j in 0..cfg.max_panels {
        let hi = 0.5f64.powi(j as i32);
        let lo = 0.5 * hi;
        let mid = 0.5 * (lo + hi);
        let whole = gl_panel(&g, lo, hi)?;
        let halves = gl_panel(&g, lo, mid)? + gl_panel(&g, mid, hi)?;
        error += (whole - halves).norm();
        total.add(halves);
        contributions.push(halves);
        if j >= 3 && halves.norm() < cfg.panel_tol {
            break;
        }
    }
    let (tail, tail_err) = extrapolate_tail(&contributions, cfg.panel_tol)?;
    total.add(tail);
    Ok(GradedResult { value: total.value(), error: error + tail_err, boundary_tail: tail, panels: contributions.len() })
}

/// Extrapolation of `Σ_{j ≥ J} P_j` from the last panel contributions.
///
/// Endpoint behaviour `u^γ (c₀ + c₁ ln u)` makes `P_j = ρ^j (a + b j)`, which
/// satisfies a two-term linear recurrence; the recurrence is fitted to the last
/// four contributions and summed in closed form. A plain geometric ratio is the
/// fallback. Contributions already below `floor` (or at roundoff) end the sum.
fn extrapolate_tail(p: &[Complex64], floor: f64) -> Result<(Complex64, f64)> {
    let zero = Complex64::new(0.0, 0.0);
    let n = p.len();
    if n < 3 {
        return Ok((zero, p.last().map_or(0.0, |z| z.norm())));
    }
    let (last, prev) = (p[n - 1], p[n - 2]);
    if last.norm() == 0.0 {
        return Ok((zero, 0.0));
    }
    let peak = p.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let settled = last.norm().max(prev.norm()) <= floor.max(1e-14 * peak);
    if settled {
        return Ok((zero, last.norm() + prev.norm()));
    }
    if n >= 7 {
        if let (Some(t1), Some(t0)) = (recurrence_tail(&p[n - 4..]), recurrence_tail(&p[n - 5..n - 1])) {
            return Ok((t1, (t0 - last - t1).norm()));
        }
    }
    let geometric = |num: Complex64, den: Complex64| -> Option<Complex64> {
        if den.norm() == 0.0 {
            return None;
        }
        let r = num / den;
        (r.norm() < 0.95).then(|| num * r / (1.0 - r))
    };
    match (geometric(last, prev), geometric(prev, p[n - 3])) {
        (Some(t1), Some(t2)) => Ok((t1, (t2 - last - t1).norm())),
        (Some(t1), None) => Ok((t1, t1.norm())),
        _ => Err(Error::NonConvergence { what: "graded quadrature (integrand not decaying at the boundary)", achieved: last.norm() }),
    }
}

/// Fits `P_{k+2} = c₁ P_{k+1} + c₂ P_k` to four contributions and returns the
/// sum of its continuation past the last one, if the recurrence is contracting.
fn recurrence_tail(w: &[Complex64]) -> Option<Complex64> {
    let [a, b, c, d] = [w[0], w[1], w[2], w[3]];
    // c = c₁ b + c₂ a,  d = c₁ c + c₂ b
    let det = b * b - a * c;
    if det.norm() <= 1e-12 * (b.norm() * b.norm() + a.norm() * c.norm()) {
        return None;
    }
    let c1 = (c * b - d * a) / det;
    let c2 = (d * b - c * c) / det;
    // Roots of x² - c₁ x - c₂ must lie well inside the unit disk.
    let disc = (c1 * c1 + 4.0 * c2).sqrt();
    let (r1, r2) = ((c1 + disc) / 2.0, (c1 - disc) / 2.0);
    if r1.norm() >= 0.95 || r2.norm() >= 0.95 {
        return None;
    }
    // T = Σ_{k>last} P_k:  T = c₁ (d + T) + c₂ (c + d + T)
    Some((c1 * d + c2 * (c + d)) / (1.0 - c1 - c2))
}

/// Periodic trapezoid average `(1/2π) ∫ h(θ) dθ`, doubling the node count until
/// two successive estimates agree to `tol`.
pub fn angular_average<F>(h: F, min_nodes: usize, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    const MAX_NODES: usize = 8192;
    let mut n = min_nodes.max(8);
    let eval = |n: usize, offset: bool| -> Result<ComplexSum> {
        let mut acc = ComplexSum::new();
        let step = std::f64::consts::TAU / n as f64;
        for k in 0..n {
            let theta = step * (k as f64 + if offset { 0.5 } else { 0.0 });
            acc.add(h(theta)?);
        }
        Ok(acc)
    };
    let mut sum = eval(n, false)?.value();
    loop {
        // The doubled rule reuses the current nodes and adds the midpoints.
        let mid = eval(n, true)?.value();
        let coarse = sum / n as f64;
        let fine = (sum + mid) / (2 * n) as f64;
        n *= 2;
        sum += mid;
        if (fine - coarse).norm() <= tol {
            return Ok(fine);
        }
        if n >= MAX_NODES {
            return Err(Error::NonConvergence { what: "angular trapezoid", achieved: (fine - coarse).norm() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = gauss_legendre(16);
        let w: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-14);
        // ∫_{-1}^{1} x^30 dx = 2/31
        let i: f64 = rule.iter().map(|(x, w)| w * x.powi(30)).sum();
        assert!((i - 2.0 / 31.0).abs() < 1e-14);
        assert!(rule.windows(2).all(|p| p[0].0 < p[1].0));
    }

    #[test]
    fn graded_integral_of_constant_and_power() {
        let cfg = GradedConfig { panel_tol: 0.0, max_panels: 18 };
        let one = graded_integral(|_| Ok(c(1.0)), cfg).unwrap();
        assert!((one.value.re - 1.0).abs() < 1e-14);
        assert!((one.boundary_tail.re - 0.5f64.powi(18)).abs() < 1e-17);
        let lin = graded_integral(|u| Ok(c(u)), cfg).unwrap();
        assert!((lin.value.re - 0.5).abs() < 1e-14);
        // Integrable endpoint singularity u^-1/2.
        let sing = graded_integral(|u| Ok(c(u.powf(-0.5))), cfg).unwrap();
        assert!((sing.value.re - 2.0).abs() < 1e-10, "{:?}", sing);
    }

    #[test]
    fn non_integrable_endpoint_is_reported() {
        let cfg = GradedConfig { panel_tol: 0.0, max_panels: 18 };
        assert!(graded_integral(|u| Ok(c(1.0 / u)), cfg).is_err());
    }

    #[test]
    fn trapezoid_average() {
        let v = angular_average(|t| Ok(Complex64::from_polar(1.0, 3.0 * t)), 8, 1e-14).unwrap();
        assert!(v.norm() < 1e-14);
        // (1/2π)∫ 1/(1 - 0.5 cos θ) = 1/sqrt(1 - 0.25)
        let v = angular_average(|t| Ok(c(1.0 / (1.0 - 0.5 * t.cos()))), 8, 1e-14).unwrap();
        assert!((v.re - 1.0 / 0.75f64.sqrt()).abs() < 1e-13);
    }
}
