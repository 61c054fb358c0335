//! Small numerical helpers shared by the rest of the crate.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of complex numbers, real and imaginary parts tracked separately.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = ComplexSum::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

/// `ln B(a, b)` via log-gamma differences. Requires `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `B(a, b) = ∫₀¹ t^(a-1) (1-t)^(b-1) dt`, by a finite product when either
/// argument is a small positive integer.
pub fn beta(a: f64, b: f64) -> f64 {
    let small_int = |x: f64| x.fract() == 0.0 && (1.0..=64.0).contains(&x);
    if small_int(b) {
        (0..b as u32 - 1).fold(1.0 / (a + b - 1.0), |acc, i| acc * f64::from(i + 1) / (a + f64::from(i)))
    } else if small_int(a) {
        beta(b, a)
    } else {
        ln_beta(a, b).exp()
    }
}

pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

/// `ln Γ(x + b) - ln Γ(x)` for `x, b > 0`, without the cancellation of two
/// large log-gammas when `x` is large.
pub fn ln_gamma_ratio(x: f64, b: f64) -> f64 {
    if x < 30.0 {
        return ln_gamma(x + b) - ln_gamma(x);
    }
    // Stirling series difference.
    let s = |z: f64| {
        let z2 = z * z;
        (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
    };
    (x - 0.5) * (b / x).ln_1p() + b * (x + b).ln() - b + (s(x + b) - s(x))
}

/// `m! / (m - k)!` by multiplicative recurrence, 0 when `k > m`.
pub fn falling_factorial(m: u64, k: u32) -> f64 {
    if u64::from(k) > m {
        return 0.0;
    }
    (0..u64::from(k)).fold(1.0, |acc, i| acc * (m - i) as f64)
}

/// Pochhammer symbol `(x)_k = x (x+1) ... (x+k-1)`.
pub fn rising_factorial(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x + f64::from(i)))
}

pub fn factorial(k: u32) -> f64 {
    rising_factorial(1.0, k)
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `(-1)^n` as a float.
pub fn parity_sign(n: u32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Parse complex literals of the form `a`, `bi`, `a+bi`, `a-bi` (also `j` for the unit).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let unit = |c: char| c == 'i' || c == 'j';
    if !s.ends_with(unit) {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    }
    let body = &s[..s.len() - 1];
    // Split at the last sign that is not part of an exponent or the leading sign.
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let parse_im = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => t.parse::<f64>().ok(),
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().ok()?;
            let im = parse_im(&body[i..])?;
            Some(Complex64::new(re, im))
        }
        None => parse_im(body).map(|im| Complex64::new(0.0, im)),
    }
}

/// Serde adapter writing complex numbers as `{"re": x, "im": y}`.
pub mod serde_complex {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Repr {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Repr { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let r = Repr::deserialize(d)?;
        Ok(Complex64::new(r.re, r.im))
    }

    pub mod option {
        use super::Repr;
        use num_complex::Complex64;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
            z.map(|z| Repr { re: z.re, im: z.im }).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
            Ok(Option::<Repr>::deserialize(d)?.map(|r| Complex64::new(r.re, r.im)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let mut s = CompensatedSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn beta_matches_factorial_ratio() {
        // B(2,5) = 1! 4! / 6!
        assert!((beta(2.0, 5.0) - 1.0 / 30.0).abs() < 1e-15);
        assert!((beta(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((beta(2.5, 1.5) - ln_beta(2.5, 1.5).exp()).abs() < 1e-15);
        assert!((beta(0.5, 3.0) - beta(3.0, 0.5)).abs() < 1e-15);
    }

    #[test]
    fn gamma_ratio_is_stable_for_large_arguments() {
        // Γ(x+3)/Γ(x) = x(x+1)(x+2)
        for x in [1.5f64, 29.0, 31.0, 1e3, 1e12] {
            let exact = x.ln() + (x + 1.0).ln() + (x + 2.0).ln();
            assert!((ln_gamma_ratio(x, 3.0) - exact).abs() < 1e-13 * exact.abs().max(1.0), "x={x}");
        }
        let x = 40.0;
        assert!((ln_gamma_ratio(x, 0.5) - (ln_gamma(x + 0.5) - ln_gamma(x))).abs() < 1e-12);
    }

    #[test]
    fn factorial_helpers() {
        assert_eq!(falling_factorial(3, 2), 6.0);
        assert_eq!(falling_factorial(1, 2), 0.0);
        assert_eq!(falling_factorial(5, 0), 1.0);
        assert_eq!(rising_factorial(3.0, 2), 12.0);
        assert_eq!(factorial(5), 120.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(2, 5), 0.0);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5"), Some(Complex64::new(0.5, 0.0)));
        assert_eq!(parse_complex("0.3+0.4i"), Some(Complex64::new(0.3, 0.4)));
        assert_eq!(parse_complex("-0.3-0.4i"), Some(Complex64::new(-0.3, -0.4)));
        assert_eq!(parse_complex("1e-3-2e-1i"), Some(Complex64::new(1e-3, -0.2)));
        assert_eq!(parse_complex("-i"), Some(Complex64::new(0.0, -1.0)));
        assert_eq!(parse_complex("0.25j"), Some(Complex64::new(0.0, 0.25)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex(""), None);
    }
}
