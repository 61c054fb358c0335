//! Traces by three independent routes, singular values of truncations,
//! exponential decay fits and the Carleson bound probe.
//!
//! * matrix route: partial diagonal sum of the truncation plus a per-family tail;
//! * Berezin route: `∫ T̃ dλ` by graded quadrature of the series Berezin transform;
//! * closed form: `(-1)^(α+β) ∫ D^{α,β} dμ` with `D^{α,β}` from its finite Leibniz form.

use num_complex::Complex64;
use serde::Serialize;

use crate::berezin::{berezin_series, invariant_integral, InvariantIntegral};
use crate::error::{Error, Result};
use crate::kernel::{basis_deriv_coeff, d_alpha_beta_closed};
use crate::linalg::{hermitian_eigenvalues, jacobi_svd};
use crate::measure::{trace_class_condition, BaseMeasure, SymbolSpec};
use crate::numeric::{
    beta, binomial, falling_factorial, factorial, ln_beta, ln_gamma_fn, ln_gamma_ratio, parity_sign, rising_factorial, serde_complex,
    ComplexSum,
};
use crate::operator::{assemble, entry, TruncatedOperator};
use crate::quadrature::{graded_integral, GradedConfig};

/// Remainder of the diagonal series beyond the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    /// Estimated value of the remainder, added to the partial sum.
    #[serde(with = "serde_complex")]
    pub correction: Complex64,
    /// Bound on the error after the correction.
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixTrace {
    pub dim: usize,
    #[serde(with = "serde_complex")]
    pub partial_sum: Complex64,
    /// `None` when no tail estimate is available for the family.
    pub tail: Option<TailEstimate>,
}

impl MatrixTrace {
    pub fn value(&self) -> Complex64 {
        self.partial_sum + self.tail.map_or(Complex64::new(0.0, 0.0), |t| t.correction)
    }

    pub fn error(&self) -> f64 {
        self.tail.map_or(f64::INFINITY, |t| t.bound)
    }
}

/// Sum of `term(n)` for `n >= first`, explicit while the term ratio is `>= 1`,
/// then bounded geometrically by the (nonincreasing) ratio.
fn geometric_tail(first: u64, term: impl Fn(u64) -> f64, ratio: impl Fn(u64) -> f64) -> Option<f64> {
    let mut acc = 0.0;
    for n in first..first + 1_000_000 {
        let t = term(n);
        let r = ratio(n);
        if !t.is_finite() {
            return None;
        }
        if r < 1.0 {
            return Some(acc + t / (1.0 - r));
        }
        acc += t;
    }
    None
}

fn zero_tail() -> Option<TailEstimate> {
    Some(TailEstimate { correction: Complex64::new(0.0, 0.0), bound: 0.0 })
}

fn atomic_tail(alpha: u32, beta: u32, base: &BaseMeasure, dim: u64) -> Result<Option<TailEstimate>> {
    let (a, b) = (f64::from(alpha), f64::from(beta));
    let first = dim.max(u64::from(alpha.max(beta)));
    Ok(match base {
        BaseMeasure::PointMass { z0 } => {
            let x = z0.norm_sqr();
            if x == 0.0 {
                // Only n = α = β carries mass.
                return Ok(zero_tail());
            }
            let r = z0.norm();
            let term = |n: u64| {
                basis_deriv_coeff(n, alpha) * basis_deriv_coeff(n, beta) * r.powf(2.0 * n as f64 - a - b)
            };
            let ratio = |n: u64| {
                let n = n as f64;
                x * (n + 2.0) / (n + 1.0) * (n + 1.0) / (n + 1.0 - a) * (n + 1.0) / (n + 1.0 - b)
            };
            geometric_tail(first, term, ratio).map(|bound| TailEstimate { correction: Complex64::new(0.0, 0.0), bound })
        }
        BaseMeasure::CircleUniform { r0 } => {
            if alpha != beta {
                return Ok(zero_tail());
            }
            let x = r0 * r0;
            let term = |n: u64| basis_deriv_coeff(n, alpha).powi(2) * x.powf(n as f64 - a);
            let ratio = |n: u64| {
                let n = n as f64;
                x * (n + 2.0) / (n + 1.0) * ((n + 1.0) / (n + 1.0 - a)).powi(2)
            };
            geometric_tail(first, term, ratio).map(|bound| TailEstimate { correction: Complex64::new(0.0, 0.0), bound })
        }
        BaseMeasure::CircleRadialDerivative { r0 } => {
            let x = r0 * r0;
            let first = first.max(1);
            let term = |n: u64| 2.0 * n as f64 * (n as f64 + 1.0) * r0.powf(2.0 * n as f64 - 1.0);
            let ratio = |n: u64| x * (n as f64 + 2.0) / n as f64;
            geometric_tail(first, term, ratio).map(|bound| TailEstimate { correction: Complex64::new(0.0, 0.0), bound })
        }
        BaseMeasure::RadialPower { s, a: w } => {
            if alpha != beta {
                return Ok(zero_tail());
            }
            Some(radial_power_tail(alpha, *s, *w, dim)?)
        }
        BaseMeasure::Combination { .. } => unreachable!("combinations are expanded by the caller"),
    })
}

/// Euler–Maclaurin remainder of `Σ_{n ≥ N} (n+1) (n!/(n-α)!)² B(n-α+a+1, s+1)`.
fn radial_power_tail(alpha: u32, s: f64, w: f64, dim: u64) -> Result<TailEstimate> {
    let a = f64::from(alpha);
    if s - 2.0 * a - 2.0 <= -1.0 {
        return Err(Error::NotTraceClass { exponent: s - 2.0 * a - 2.0 });
    }
    let ln_gamma_s = ln_gamma_fn(s + 1.0);
    let ln_f = |x: f64| {
        let falling: f64 = (0..alpha).map(|i| (x - f64::from(i)).ln()).sum();
        (x + 1.0).ln() + 2.0 * falling + ln_gamma_s - ln_gamma_ratio(x - a + w + 1.0, s + 1.0)
    };
    let f = |x: f64| ln_f(x).exp();
    // Explicit terms until the continuous interpolant is comfortably smooth.
    let start = dim.max(u64::from(alpha) + 64);
    let mut explicit = crate::numeric::CompensatedSum::new();
    for n in dim..start {
        explicit.add(basis_deriv_coeff(n, alpha).powi(2) * beta(n as f64 - a + w + 1.0, s + 1.0));
    }
    let x0 = start as f64;
    // ∫_{x0}^∞ f(x) dx = ∫_0^1 f(x0 / v) x0 / v² dv
    let integral = graded_integral(
        |v| Ok(Complex64::new(f(x0 / v) * x0 / (v * v), 0.0)),
        GradedConfig { panel_tol: 0.0, max_panels: 60 },
    )?;
    let h1 = 2e-2 * x0;
    let d1 = (8.0 * (f(x0 + h1) - f(x0 - h1)) - (f(x0 + 2.0 * h1) - f(x0 - 2.0 * h1))) / (12.0 * h1);
    let h3 = 5e-2 * x0;
    let d3 = (f(x0 + 2.0 * h3) - 2.0 * f(x0 + h3) + 2.0 * f(x0 - h3) - f(x0 - 2.0 * h3)) / (2.0 * h3 * h3 * h3);
    let em = integral.value.re + 0.5 * f(x0) - d1 / 12.0 + d3 / 720.0;
    let correction = explicit.value() + em;
    let bound = d3.abs() / 720.0 + integral.error + 1e-12 * correction.abs();
    Ok(TailEstimate { correction: Complex64::new(correction, 0.0), bound })
}

/// Partial diagonal sum `Σ_{n<N} ⟨T e_n, e_n⟩` with a tail estimate.
pub fn trace_matrix(symbol: &SymbolSpec, dim: usize) -> Result<MatrixTrace> {
    symbol.validate()?;
    if dim == 0 {
        return Err(Error::Contract("dimension must be positive".into()));
    }
    let mut acc = ComplexSum::new();
    for n in 0..dim as u64 {
        acc.add(entry(symbol, n, n)?);
    }
    let mut correction = ComplexSum::new();
    let mut bound = 0.0;
    let mut known = true;
    for (c, m) in symbol.base.terms() {
        if c.norm() == 0.0 {
            continue;
        }
        match atomic_tail(symbol.alpha, symbol.beta, m, dim as u64)? {
            Some(t) => {
                correction.add(c * parity_sign(symbol.alpha + symbol.beta) * t.correction);
                bound += c.norm() * t.bound;
            }
            None => known = false,
        }
    }
    let tail = known.then(|| TailEstimate { correction: correction.value(), bound });
    Ok(MatrixTrace { dim, partial_sum: acc.value(), tail })
}

/// `(-1)^(α+β) ∫ D^{α,α} (1-|w|²)^s |w|^(2a) dA` as a finite sum of Beta integrals.
fn radial_power_closed(alpha: u32, s: f64, w: f64) -> f64 {
    let a = f64::from(alpha);
    let sum: f64 = (0..=alpha)
        .map(|i| {
            let fi = f64::from(i);
            binomial(alpha, i)
                * falling_factorial(u64::from(alpha), i)
                * rising_factorial(a + 2.0, alpha - i)
                * ln_beta(a - fi + w + 1.0, s - 2.0 * a - 1.0 + fi).exp()
        })
        .sum();
    factorial(alpha + 1) * sum
}

fn atomic_closed(alpha: u32, beta: u32, base: &BaseMeasure) -> Complex64 {
    let sign = parity_sign(alpha + beta);
    match base {
        BaseMeasure::PointMass { z0 } => sign * d_alpha_beta_closed(*z0, alpha, beta),
        BaseMeasure::RadialPower { s, a } => {
            if alpha != beta {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(radial_power_closed(alpha, *s, *a), 0.0)
            }
        }
        BaseMeasure::CircleUniform { r0 } => {
            if alpha != beta {
                Complex64::new(0.0, 0.0)
            } else {
                // The angular average of D^{α,α} is its value on the positive axis.
                d_alpha_beta_closed(Complex64::new(*r0, 0.0), alpha, alpha)
            }
        }
        BaseMeasure::CircleRadialDerivative { r0 } => {
            // -(d/dr)(1-r²)⁻² at r0
            Complex64::new(-4.0 * r0 / (1.0 - r0 * r0).powi(3), 0.0)
        }
        BaseMeasure::Combination { .. } => unreachable!("combinations are expanded by the caller"),
    }
}

/// Trace from the pairing of the symbol with `(1-|w|²)⁻²`.
pub fn trace_closed_form(symbol: &SymbolSpec) -> Result<Complex64> {
    trace_class_condition(symbol)?;
    let acc: ComplexSum =
        symbol.base.terms().into_iter().map(|(c, m)| c * atomic_closed(symbol.alpha, symbol.beta, m)).collect();
    Ok(acc.value())
}

/// Trace as `∫_D T̃(z) dλ(z)`, the Berezin transform taken from the moment series.
pub fn trace_berezin(symbol: &SymbolSpec, tol: f64) -> Result<InvariantIntegral> {
    trace_class_condition(symbol)?;
    let radial = symbol.base.is_radial() && symbol.alpha == symbol.beta;
    let series_tol = tol / 10.0;
    // A ring at depth u = 1-|z|² carries weight ~ 1/u in the graded panels.
    let sampler = |z: Complex64| {
        let u = 1.0 - z.norm_sqr();
        Ok(berezin_series(symbol, z, series_tol * u)?.value)
    };
    invariant_integral(sampler, radial, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerezinRouteValue {
    #[serde(with = "serde_complex")]
    pub value: Complex64,
    pub quadrature_error: f64,
    #[serde(with = "serde_complex")]
    pub boundary_tail: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixRouteValue {
    #[serde(with = "serde_complex")]
    pub value: Complex64,
    pub dim: usize,
    #[serde(with = "serde_complex")]
    pub partial_sum: Complex64,
    pub tail_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub symbol: SymbolSpec,
    /// Reported trace: closed form when available, else the matrix route.
    #[serde(with = "serde_complex")]
    pub trace: Complex64,
    pub route_matrix: MatrixRouteValue,
    pub route_berezin: BerezinRouteValue,
    #[serde(with = "serde_complex::option")]
    pub route_closed_form: Option<Complex64>,
    pub agree: bool,
    #[serde(with = "serde_complex::option", skip_serializing_if = "Option::is_none")]
    pub published_value: Option<Complex64>,
}

impl TraceReport {
    pub fn routes(&self) -> Vec<(&'static str, Complex64, f64)> {
        let mut v = vec![
            ("matrix", self.route_matrix.value, self.route_matrix.tail_estimate.unwrap_or(f64::INFINITY)),
            ("berezin", self.route_berezin.value, self.route_berezin.quadrature_error),
        ];
        if let Some(c) = self.route_closed_form {
            v.push(("closed_form", c, 0.0));
        }
        v
    }
}

/// Pairwise agreement within the combined error estimates plus `tol` relative slack.
pub fn routes_agree(routes: &[(&'static str, Complex64, f64)], tol: f64) -> bool {
    routes.iter().enumerate().all(|(i, (_, vi, ei))| {
        routes[i + 1..].iter().all(|(_, vj, ej)| {
            let scale = vi.norm().max(vj.norm()).max(1.0);
            (vi - vj).norm() <= ei + ej + tol * scale
        })
    })
}

/// All three trace routes for one symbol.
pub fn trace_report(symbol: &SymbolSpec, dim: usize, tol: f64) -> Result<TraceReport> {
    trace_class_condition(symbol)?;
    let matrix = trace_matrix(symbol, dim)?;
    let berezin = trace_berezin(symbol, tol)?;
    let closed = trace_closed_form(symbol)?;
    let mut report = TraceReport {
        symbol: symbol.clone(),
        trace: closed,
        route_matrix: MatrixRouteValue {
            value: matrix.value(),
            dim,
            partial_sum: matrix.partial_sum,
            tail_estimate: matrix.tail.map(|t| t.bound),
        },
        route_berezin: BerezinRouteValue {
            value: berezin.value,
            quadrature_error: berezin.error,
            boundary_tail: berezin.boundary_tail,
        },
        route_closed_form: Some(closed),
        agree: false,
        published_value: None,
    };
    report.agree = routes_agree(&report.routes(), tol);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub sigma: f64,
    pub window: (usize, usize),
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub svals: Vec<f64>,
    pub numerical_rank: usize,
    pub rank_tol: f64,
    pub fit: Option<DecayFit>,
}

/// Full singular value set of the truncation, descending, with numerical rank.
pub fn singular_values(op: &TruncatedOperator, rank_tol: f64) -> Result<SpectrumReport> {
    if op.dim > crate::operator::MAX_DIM {
        return Err(Error::ResourceCap(format!("dimension {} exceeds {}", op.dim, crate::operator::MAX_DIM)));
    }
    let svd = jacobi_svd(&op.entries)?;
    let top = svd.s.first().copied().unwrap_or(0.0);
    let numerical_rank = svd.s.iter().filter(|&&x| x > rank_tol * top).count();
    Ok(SpectrumReport { svals: svd.s, numerical_rank, rank_tol, fit: None })
}

/// Least squares fit of `ln s_n = ln C - σ n` over `n0 ..= n1`.
pub fn decay_fit(report: &SpectrumReport, window: (usize, usize)) -> Result<DecayFit> {
    let (n0, n1) = window;
    if n1 <= n0 + 4 {
        return Err(Error::Window(format!("window ({n0}, {n1}) needs n1 > n0 + 4")));
    }
    if n1 >= report.svals.len() {
        return Err(Error::Window(format!("window end {n1} is past the {} singular values", report.svals.len())));
    }
    let pts: Vec<(f64, f64)> = (n0..=n1).map(|n| (n as f64, report.svals[n])).collect();
    if let Some((n, s)) = pts.iter().find(|(_, s)| !(*s > 1e-300)) {
        return Err(Error::Window(format!("singular value s_{n} = {s:e} is zero or underflowed")));
    }
    let len = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let mean_y = pts.iter().map(|p| p.1.ln()).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1.ln() - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = pts.iter().map(|p| (p.1.ln() - intercept - slope * p.0).powi(2)).sum();
    Ok(DecayFit { c: intercept.exp(), sigma: -slope, window, residual: (rss / len).sqrt() })
}

/// Default fit window `(N/4, N/2)`.
pub fn default_window(dim: usize) -> (usize, usize) {
    (dim / 4, dim / 2)
}

/// Top eigenvalue of the `(k,k)` truncation for each dimension: the best
/// `k`-Carleson constant over polynomials of degree `< N`.
pub fn carleson_bound_estimate(base: &BaseMeasure, k: u32, dims: &[usize]) -> Result<Vec<(usize, f64)>> {
    base.validate()?;
    if !base.is_nonnegative() {
        return Err(Error::Unsupported("the Carleson probe needs a nonnegative measure".into()));
    }
    if dims.is_empty() || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract("dims must be nonempty and strictly increasing".into()));
    }
    let symbol = SymbolSpec::new(k, k, base.clone())?;
    dims.iter()
        .map(|&n| {
            let op = assemble(&symbol, n)?;
            let eig = hermitian_eigenvalues(&op.entries)?;
            Ok((n, eig[0]))
        })
        .collect()
}
