//! Base measures, distributional symbols and the two integral functionals
//! everything else consumes: monomial moments and the weighted boundary
//! integral that decides trace-class membership.
//!
//! Area measure is normalized, `dA = dx dy / π`, so that for radial
//! integrands `∫_D g(|w|²) dA(w) = ∫₀¹ g(t) dt`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{beta, ComplexSum};

/// Largest `alpha + beta` accepted by [`SymbolSpec`].
pub const MAX_DERIVATIVE_ORDER: u32 = 32;

/// A measure on the unit disk, or one of the supported distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub enum BaseMeasure {
    /// `(1-|z|²)^s |z|^(2a) dA(z)`.
    RadialPower { s: f64, a: f64 },
    /// Dirac mass at `z0`.
    PointMass { z0: Complex64 },
    /// Uniform probability measure on the circle `|z| = r0`.
    CircleUniform { r0: f64 },
    /// The distribution `∂_r δ_{r0} ⊗ dθ/2π`, paired as `φ ↦ -∂_r (avg_θ φ)(r0)`.
    CircleRadialDerivative { r0: f64 },
    /// Finite complex combination of the atomic kinds above.
    Combination { terms: Vec<(Complex64, BaseMeasure)> },
}

impl BaseMeasure {
    pub fn radial_power(s: f64, a: f64) -> Result<Self> {
        let m = BaseMeasure::RadialPower { s, a };
        m.validate()?;
        Ok(m)
    }

    pub fn point_mass(z0: Complex64) -> Result<Self> {
        let m = BaseMeasure::PointMass { z0 };
        m.validate()?;
        Ok(m)
    }

    pub fn circle_uniform(r0: f64) -> Result<Self> {
        let m = BaseMeasure::CircleUniform { r0 };
        m.validate()?;
        Ok(m)
    }

    pub fn circle_radial_derivative(r0: f64) -> Result<Self> {
        let m = BaseMeasure::CircleRadialDerivative { r0 };
        m.validate()?;
        Ok(m)
    }

    pub fn combination(terms: Vec<(Complex64, BaseMeasure)>) -> Result<Self> {
        let m = BaseMeasure::Combination { terms };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BaseMeasure::RadialPower { s, a } => {
                if !(s.is_finite() && a.is_finite() && *s > -1.0 && *a > -1.0) {
                    return Err(Error::Contract(format!(
                        "radial power weight needs s > -1 and a > -1, got s = {s}, a = {a}"
                    )));
                }
            }
            BaseMeasure::PointMass { z0 } => {
                if !(z0.re.is_finite() && z0.im.is_finite() && z0.norm() < 1.0) {
                    return Err(Error::Contract(format!(
                        "point mass must sit strictly inside the disk, got |z0| = {}",
                        z0.norm()
                    )));
                }
            }
            BaseMeasure::CircleUniform { r0 } | BaseMeasure::CircleRadialDerivative { r0 } => {
                if !(*r0 > 0.0 && *r0 < 1.0) {
                    return Err(Error::Contract(format!("circle radius must lie in (0,1), got {r0}")));
                }
            }
            BaseMeasure::Combination { terms } => {
                if terms.is_empty() {
                    return Err(Error::Contract("combination must be nonempty".into()));
                }
                for (c, m) in terms {
                    if !(c.re.is_finite() && c.im.is_finite()) {
                        return Err(Error::Contract("combination coefficient must be finite".into()));
                    }
                    if matches!(m, BaseMeasure::Combination { .. }) {
                        return Err(Error::Contract("nested combinations are not allowed".into()));
                    }
                    m.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Atomic components with their coefficients; an atomic measure is its own single term.
    pub fn terms(&self) -> Vec<(Complex64, &BaseMeasure)> {
        match self {
            BaseMeasure::Combination { terms } => terms.iter().map(|(c, m)| (*c, m)).collect(),
            m => vec![(Complex64::new(1.0, 0.0), m)],
        }
    }

    /// Rotation invariant (all moments vanish off the diagonal `p = q`).
    pub fn is_radial(&self) -> bool {
        match self {
            BaseMeasure::RadialPower { .. }
            | BaseMeasure::CircleUniform { .. }
            | BaseMeasure::CircleRadialDerivative { .. } => true,
            BaseMeasure::PointMass { .. } => false,
            BaseMeasure::Combination { terms } => terms.iter().all(|(_, m)| m.is_radial()),
        }
    }

    /// A genuine nonnegative measure (distributions and complex weights excluded).
    pub fn is_nonnegative(&self) -> bool {
        match self {
            BaseMeasure::RadialPower { .. }
            | BaseMeasure::PointMass { .. }
            | BaseMeasure::CircleUniform { .. } => true,
            BaseMeasure::CircleRadialDerivative { .. } => false,
            BaseMeasure::Combination { terms } => terms
                .iter()
                .all(|(c, m)| c.im == 0.0 && c.re >= 0.0 && m.is_nonnegative()),
        }
    }

    pub fn is_distribution(&self) -> bool {
        match self {
            BaseMeasure::CircleRadialDerivative { .. } => true,
            BaseMeasure::Combination { terms } => terms.iter().any(|(_, m)| m.is_distribution()),
            _ => false,
        }
    }

    /// Complex conjugate measure: combination coefficients conjugated.
    pub fn conj(&self) -> BaseMeasure {
        match self {
            BaseMeasure::Combination { terms } => BaseMeasure::Combination {
                terms: terms.iter().map(|(c, m)| (c.conj(), m.clone())).collect(),
            },
            m => m.clone(),
        }
    }
}

/// The symbol `F = ∂^α ∂̄^β μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolRepr", into = "SymbolRepr")]
pub struct SymbolSpec {
    pub alpha: u32,
    pub beta: u32,
    pub base: BaseMeasure,
}

impl SymbolSpec {
    pub fn new(alpha: u32, beta: u32, base: BaseMeasure) -> Result<Self> {
        let s = SymbolSpec { alpha, beta, base };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.alpha + self.beta > MAX_DERIVATIVE_ORDER {
            return Err(Error::Contract(format!(
                "alpha + beta = {} exceeds the cap {MAX_DERIVATIVE_ORDER}",
                self.alpha + self.beta
            )));
        }
        if self.base.is_distribution() && (self.alpha, self.beta) != (0, 0) {
            return Err(Error::Unsupported(
                "the circle radial-derivative distribution is only paired with alpha = beta = 0".into(),
            ));
        }
        Ok(())
    }

    /// `(-1)^(α+β)`.
    pub fn sign(&self) -> f64 {
        crate::numeric::parity_sign(self.alpha + self.beta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid symbol JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("symbol serialization is infallible")
    }
}

/// Outcome of the weighted boundary integral `∫ (1-|w|²)^(-2k-2) d|μ|(w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitenessReport {
    pub k: u32,
    pub finite: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub divergence_exponent: Option<f64>,
}

/// Monomial moment `M(p,q) = ∫ w^p conj(w)^q dμ(w)`.
pub fn moment(base: &BaseMeasure, p: u64, q: u64) -> Result<Complex64> {
    match base {
        BaseMeasure::RadialPower { s, a } => {
            if p != q {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(Complex64::new(beta(p as f64 + a + 1.0, s + 1.0), 0.0))
        }
        BaseMeasure::PointMass { z0 } => {
            let zp = z0.powu(to_u32(p)?);
            let zq = z0.conj().powu(to_u32(q)?);
            Ok(zp * zq)
        }
        BaseMeasure::CircleUniform { r0 } => {
            if p != q {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(Complex64::new(r0.powi(2 * to_u32(p)? as i32), 0.0))
        }
        BaseMeasure::CircleRadialDerivative { .. } => Err(Error::Unsupported(
            "the circle radial-derivative distribution has no moment functional".into(),
        )),
        BaseMeasure::Combination { terms } => {
            let mut acc = ComplexSum::new();
            for (c, m) in terms {
                acc.add(c * moment(m, p, q)?);
            }
            Ok(acc.value())
        }
    }
}

fn to_u32(p: u64) -> Result<u32> {
    u32::try_from(p).map_err(|_| Error::Contract(format!("moment index {p} is too large")))
}

/// Finite/divergent outcome of `∫ (1-|w|²)^(-exponent) d|μ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryIntegral {
    Finite(f64),
    /// Carries the endpoint power of `(1-t)` that fails integrability.
    Divergent(f64),
}

/// `∫ (1-|w|²)^(-exponent) d|μ|(w)` for a genuine measure, decided analytically.
///
/// Combinations are bounded term-wise by `Σ |c_i| ∫ ... dμ_i` and declared
/// divergent as soon as any term with nonzero coefficient diverges.
pub fn boundary_integral(base: &BaseMeasure, exponent: f64) -> Result<BoundaryIntegral> {
    match base {
        BaseMeasure::RadialPower { s, a } => {
            let endpoint = s - exponent;
            if endpoint > -1.0 {
                Ok(BoundaryIntegral::Finite(beta(a + 1.0, endpoint + 1.0)))
            } else {
                Ok(BoundaryIntegral::Divergent(endpoint))
            }
        }
        BaseMeasure::PointMass { z0 } => Ok(BoundaryIntegral::Finite((1.0 - z0.norm_sqr()).powf(-exponent))),
        BaseMeasure::CircleUniform { r0 } => Ok(BoundaryIntegral::Finite((1.0 - r0 * r0).powf(-exponent))),
        BaseMeasure::CircleRadialDerivative { .. } => Err(Error::Unsupported(
            "total variation of the circle radial-derivative distribution is not a measure".into(),
        )),
        BaseMeasure::Combination { terms } => {
            let mut total = 0.0;
            let mut worst: Option<f64> = None;
            for (c, m) in terms {
                if c.norm() == 0.0 {
                    continue;
                }
                match boundary_integral(m, exponent)? {
                    BoundaryIntegral::Finite(v) => total += c.norm() * v,
                    BoundaryIntegral::Divergent(e) => worst = Some(worst.map_or(e, |w: f64| w.min(e))),
                }
            }
            Ok(match worst {
                Some(e) => BoundaryIntegral::Divergent(e),
                None => BoundaryIntegral::Finite(total),
            })
        }
    }
}

/// The `k`-Carleson trace-class integral `∫ (1-|w|²)^(-2k-2) d|μ|(w)`.
pub fn carleson_integral(base: &BaseMeasure, k: u32) -> Result<FinitenessReport> {
    base.validate()?;
    let exponent = 2.0 * f64::from(k) + 2.0;
    Ok(match boundary_integral(base, exponent)? {
        BoundaryIntegral::Finite(v) => FinitenessReport { k, finite: true, value: Some(v), divergence_exponent: None },
        BoundaryIntegral::Divergent(e) => {
            FinitenessReport { k, finite: false, value: None, divergence_exponent: Some(e) }
        }
    })
}

/// Checks the trace-class condition for `∂^α ∂̄^β μ`, where `2k = α + β` may be odd.
/// The circle radial-derivative distribution is compactly supported and always admissible.
pub fn trace_class_condition(symbol: &SymbolSpec) -> Result<()> {
    symbol.validate()?;
    let exponent = f64::from(symbol.alpha + symbol.beta) + 2.0;
    let mut worst: Option<f64> = None;
    for (c, m) in symbol.base.terms() {
        if matches!(m, BaseMeasure::CircleRadialDerivative { .. }) || c.norm() == 0.0 {
            continue;
        }
        if let BoundaryIntegral::Divergent(e) = boundary_integral(m, exponent)? {
            worst = Some(worst.map_or(e, |w: f64| w.min(e)));
        }
    }
    match worst {
        Some(exponent) => Err(Error::NotTraceClass { exponent }),
        None => Ok(()),
    }
}

// JSON schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MeasureRepr {
    RadialPower {
        s: f64,
        #[serde(default)]
        a: f64,
    },
    PointMass {
        re: f64,
        im: f64,
    },
    CircleUniform {
        r0: f64,
    },
    CircleRadialDerivative {
        r0: f64,
    },
    Combination {
        terms: Vec<TermRepr>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    coeff_re: f64,
    coeff_im: f64,
    measure: MeasureRepr,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolRepr {
    alpha: u32,
    beta: u32,
    measure: BaseMeasure,
}

impl TryFrom<MeasureRepr> for BaseMeasure {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        let m = match r {
            MeasureRepr::RadialPower { s, a } => BaseMeasure::RadialPower { s, a },
            MeasureRepr::PointMass { re, im } => BaseMeasure::PointMass { z0: Complex64::new(re, im) },
            MeasureRepr::CircleUniform { r0 } => BaseMeasure::CircleUniform { r0 },
            MeasureRepr::CircleRadialDerivative { r0 } => BaseMeasure::CircleRadialDerivative { r0 },
            MeasureRepr::Combination { terms } => BaseMeasure::Combination {
                terms: terms
                    .into_iter()
                    .map(|t| Ok((Complex64::new(t.coeff_re, t.coeff_im), BaseMeasure::try_from(t.measure)?)))
                    .collect::<Result<_>>()?,
            },
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<BaseMeasure> for MeasureRepr {
    fn from(m: BaseMeasure) -> Self {
        match m {
            BaseMeasure::RadialPower { s, a } => MeasureRepr::RadialPower { s, a },
            BaseMeasure::PointMass { z0 } => MeasureRepr::PointMass { re: z0.re, im: z0.im },
            BaseMeasure::CircleUniform { r0 } => MeasureRepr::CircleUniform { r0 },
            BaseMeasure::CircleRadialDerivative { r0 } => MeasureRepr::CircleRadialDerivative { r0 },
            BaseMeasure::Combination { terms } => MeasureRepr::Combination {
                terms: terms
                    .into_iter()
                    .map(|(c, m)| TermRepr { coeff_re: c.re, coeff_im: c.im, measure: m.into() })
                    .collect(),
            },
        }
    }
}

impl TryFrom<SymbolRepr> for SymbolSpec {
    type Error = Error;

    fn try_from(r: SymbolRepr) -> Result<Self> {
        SymbolSpec::new(r.alpha, r.beta, r.measure)
    }
}

impl From<SymbolSpec> for SymbolRepr {
    fn from(s: SymbolSpec) -> Self {
        SymbolRepr { alpha: s.alpha, beta: s.beta, measure: s.base }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn moment_examples() {
        let pm = BaseMeasure::point_mass(c(0.5, 0.0)).unwrap();
        assert_eq!(moment(&pm, 2, 1).unwrap(), c(0.125, 0.0));
        let rp = BaseMeasure::radial_power(4.0, 0.0).unwrap();
        assert!((moment(&rp, 1, 1).unwrap().re - 1.0 / 30.0).abs() < 1e-16);
        let cu = BaseMeasure::circle_uniform(0.5).unwrap();
        assert_eq!(moment(&cu, 2, 3).unwrap(), c(0.0, 0.0));
        assert_eq!(moment(&cu, 3, 3).unwrap(), c(0.015625, 0.0));
        let crd = BaseMeasure::circle_radial_derivative(0.5).unwrap();
        assert!(matches!(moment(&crd, 1, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn radial_moment_matches_log_gamma_path() {
        // Non-integer exponents take the log-gamma route; integer ones the product.
        for (s, a) in [(4.0, 0.0), (2.5, 0.5), (0.0, 3.0), (-0.5, -0.5)] {
            let m = BaseMeasure::RadialPower { s, a };
            for p in [0u64, 1, 7, 40] {
                let exact = crate::numeric::ln_beta(p as f64 + a + 1.0, s + 1.0).exp();
                let got = moment(&m, p, p).unwrap().re;
                assert!((got - exact).abs() <= 1e-12 * exact, "s={s} a={a} p={p}");
            }
        }
    }

    #[test]
    fn carleson_examples() {
        let r = carleson_integral(&BaseMeasure::RadialPower { s: 4.0, a: 0.0 }, 1).unwrap();
        assert_eq!((r.finite, r.value, r.divergence_exponent), (true, Some(1.0), None));
        let r = carleson_integral(&BaseMeasure::RadialPower { s: 2.0, a: 0.0 }, 1).unwrap();
        assert_eq!((r.finite, r.value, r.divergence_exponent), (false, None, Some(-2.0)));
        let r = carleson_integral(&BaseMeasure::PointMass { z0: c(0.0, 0.0) }, 3).unwrap();
        assert_eq!(r.value, Some(1.0));
        let r = carleson_integral(&BaseMeasure::CircleUniform { r0: 0.5 }, 0).unwrap();
        assert!((r.value.unwrap() - 0.75f64.powi(-2)).abs() < 1e-15);
        assert!(carleson_integral(&BaseMeasure::CircleRadialDerivative { r0: 0.5 }, 0).is_err());
    }

    #[test]
    fn finiteness_report_json_has_one_of_value_or_exponent() {
        let r = carleson_integral(&BaseMeasure::RadialPower { s: 2.0, a: 0.0 }, 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        assert_eq!(v["divergence_exponent"], -2.0);
        assert!(v.get("value").is_none());
    }

    #[test]
    fn combinations_are_judged_term_wise() {
        let good = BaseMeasure::RadialPower { s: 4.0, a: 0.0 };
        let bad = BaseMeasure::RadialPower { s: 2.0, a: 0.0 };
        let mix = BaseMeasure::combination(vec![(c(1.0, 0.0), good.clone()), (c(0.0, -2.0), bad.clone())]).unwrap();
        assert_eq!(carleson_integral(&mix, 1).unwrap().divergence_exponent, Some(-2.0));
        let zeroed = BaseMeasure::combination(vec![(c(3.0, 4.0), good), (c(0.0, 0.0), bad)]).unwrap();
        assert_eq!(carleson_integral(&zeroed, 1).unwrap().value, Some(5.0));
    }

    #[test]
    fn trace_class_gate() {
        let sym = |s| SymbolSpec::new(1, 1, BaseMeasure::RadialPower { s, a: 0.0 }).unwrap();
        assert_eq!(trace_class_condition(&sym(2.0)), Err(Error::NotTraceClass { exponent: -2.0 }));
        assert!(trace_class_condition(&sym(4.0)).is_ok());
        // Odd α+β uses the exponent α+β+2 directly.
        let odd = |s| SymbolSpec::new(1, 0, BaseMeasure::RadialPower { s, a: 0.0 }).unwrap();
        assert!(trace_class_condition(&odd(2.5)).is_ok());
        assert_eq!(trace_class_condition(&odd(2.0)), Err(Error::NotTraceClass { exponent: -1.0 }));
        let crd = SymbolSpec::new(0, 0, BaseMeasure::CircleRadialDerivative { r0: 0.9 }).unwrap();
        assert!(trace_class_condition(&crd).is_ok());
    }

    #[test]
    fn validation() {
        assert!(BaseMeasure::radial_power(-1.0, 0.0).is_err());
        assert!(BaseMeasure::radial_power(0.0, -1.5).is_err());
        assert!(BaseMeasure::point_mass(c(0.6, 0.8)).is_err());
        assert!(BaseMeasure::circle_uniform(1.0).is_err());
        assert!(BaseMeasure::circle_radial_derivative(0.0).is_err());
        assert!(BaseMeasure::combination(vec![]).is_err());
        let inner = BaseMeasure::Combination { terms: vec![(c(1.0, 0.0), BaseMeasure::CircleUniform { r0: 0.5 })] };
        assert!(BaseMeasure::combination(vec![(c(1.0, 0.0), inner)]).is_err());
        assert!(SymbolSpec::new(20, 13, BaseMeasure::CircleUniform { r0: 0.5 }).is_err());
        assert!(SymbolSpec::new(16, 16, BaseMeasure::CircleUniform { r0: 0.5 }).is_ok());
        assert!(matches!(
            SymbolSpec::new(1, 0, BaseMeasure::CircleRadialDerivative { r0: 0.5 }),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn json_schema() {
        let text = r#"{"alpha":0,"beta":0,"measure":{"kind":"circle_radial_derivative","r0":0.5}}"#;
        let s = SymbolSpec::from_json(text).unwrap();
        assert_eq!(s.base, BaseMeasure::CircleRadialDerivative { r0: 0.5 });
        assert_eq!(SymbolSpec::from_json(&s.to_json()).unwrap(), s);

        let combo = r#"{"alpha":1,"beta":1,"measure":{"kind":"combination","terms":[
            {"coeff_re":1,"coeff_im":0.5,"measure":{"kind":"point_mass","re":0.1,"im":-0.2}},
            {"coeff_re":2,"coeff_im":0,"measure":{"kind":"radial_power","s":4}}]}}"#;
        let s = SymbolSpec::from_json(combo).unwrap();
        assert_eq!(SymbolSpec::from_json(&s.to_json()).unwrap(), s);

        for bad in [
            r#"{"alpha":0,"beta":0,"measure":{"kind":"circle_uniform","r0":0.5,"r1":1}}"#,
            r#"{"alpha":0,"beta":0,"gamma":1,"measure":{"kind":"circle_uniform","r0":0.5}}"#,
            r#"{"alpha":0,"beta":0,"measure":{"kind":"circle","r0":0.5}}"#,
            r#"{"alpha":0,"beta":0,"measure":{"kind":"circle_uniform","r0":1.5}}"#,
            r#"{"alpha":-1,"beta":0,"measure":{"kind":"circle_uniform","r0":0.5}}"#,
        ] {
            assert!(matches!(SymbolSpec::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    fn atomic() -> impl Strategy<Value = BaseMeasure> {
        prop_oneof![
            (-0.9f64..6.0, -0.9f64..3.0).prop_map(|(s, a)| BaseMeasure::RadialPower { s, a }),
            (0.0f64..0.95, 0.0f64..std::f64::consts::TAU)
                .prop_map(|(r, t)| BaseMeasure::PointMass { z0: Complex64::from_polar(r, t) }),
            (0.05f64..0.95).prop_map(|r0| BaseMeasure::CircleUniform { r0 }),
        ]
    }

    proptest! {
        #[test]
        fn moments_are_hermitian_and_radially_banded(m in atomic(), p in 0u64..40, q in 0u64..40) {
            let a = moment(&m, p, q).unwrap();
            let b = moment(&m, q, p).unwrap();
            prop_assert_eq!(a, b.conj());
            if m.is_radial() && p != q {
                prop_assert_eq!(a, c(0.0, 0.0));
            }
        }

        #[test]
        fn combination_moments_are_linear(
            m1 in atomic(), m2 in atomic(),
            c1 in (-2.0f64..2.0, -2.0f64..2.0), c2 in (-2.0f64..2.0, -2.0f64..2.0),
            p in 0u64..30, q in 0u64..30,
        ) {
            let (c1, c2) = (c(c1.0, c1.1), c(c2.0, c2.1));
            let combo = BaseMeasure::combination(vec![(c1, m1.clone()), (c2, m2.clone())]).unwrap();
            let lhs = moment(&combo, p, q).unwrap();
            let rhs = c1 * moment(&m1, p, q).unwrap() + c2 * moment(&m2, p, q).unwrap();
            let scale = (c1 * moment(&m1, p, q).unwrap()).norm() + (c2 * moment(&m2, p, q).unwrap()).norm();
            prop_assert!((lhs - rhs).norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn carleson_integral_is_monotone_in_k(m in atomic(), k in 1u32..6) {
            let hi = carleson_integral(&m, k).unwrap();
            if let Some(v) = hi.value {
                let lo = carleson_integral(&m, k - 1).unwrap().value.unwrap();
                prop_assert!(v >= lo * (1.0 - 1e-12));
            }
        }
    }
}
