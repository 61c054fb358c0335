//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
//! 3 symbol not trace class. Every failure also writes a JSON error object to
//! standard error.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::berezin::{berezin_matrix, berezin_series, BerezinSample};
use crate::error::{Error, Result};
use crate::measure::{carleson_integral, FinitenessReport, SymbolSpec};
use crate::numeric::{parse_complex, serde_complex};
use crate::operator::{assemble, MatrixSummary, MAX_DIM};
use crate::spectral::{
    carleson_bound_estimate, decay_fit, default_window, singular_values, trace_report, SpectrumReport, TraceReport,
};
use crate::verify::{run_examples, SuiteReport};

pub const DEFAULT_DIM: usize = 256;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        }
    }
}

fn parse_z(text: &str) -> std::result::Result<Complex64, String> {
    parse_complex(text).ok_or_else(|| format!("'{text}' is not a complex literal of the form a+bi"))
}

fn parse_window(text: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = text.split_once(',').ok_or_else(|| format!("window '{text}' must be n0,n1"))?;
    let n0 = a.trim().parse().map_err(|_| format!("bad window start '{a}'"))?;
    let n1 = b.trim().parse().map_err(|_| format!("bad window end '{b}'"))?;
    Ok((n0, n1))
}

fn format_z(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Trace by the matrix, Berezin and closed-form routes.
    Trace,
    /// Singular values of the truncation with an exponential decay fit.
    Spectrum {
        /// Fit window `n0,n1` (inclusive); defaults to `N/4,N/2`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(usize, usize)>,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Berezin transform at points, by the series and by the truncated matrix.
    Berezin {
        /// Evaluation point `a+bi`; repeatable.
        #[arg(long, value_parser = parse_z)]
        z: Vec<Complex64>,
        /// Grid radii (comma separated), combined with `--angles`.
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
        /// Number of equally spaced angles per grid radius.
        #[arg(long, default_value_t = 8)]
        angles: usize,
    },
    /// Export the truncated matrix.
    Matrix,
    /// Top eigenvalue of the (k,k) truncation for increasing dimensions.
    Carleson {
        #[arg(long)]
        k: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
    /// Run the built-in oracle cases.
    Verify {
        /// Only cases whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "bergtrace", version, about = "Toeplitz operators with distributional symbols on the Bergman space")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Symbol as a JSON file path or inline JSON.
    #[arg(long, global = true)]
    pub symbol: Option<String>,
    /// Truncation dimension N.
    #[arg(long, global = true, default_value_t = DEFAULT_DIM)]
    pub dim: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl RunConfig {
    /// Parses argv (without the program name).
    pub fn parse_args<I, S>(args: I) -> std::result::Result<Self, clap::Error>
    where
        I: IntoIterator<Item = S>,
        S: Into<std::ffi::OsString> + Clone,
    {
        let argv = std::iter::once(std::ffi::OsString::from("bergtrace")).chain(args.into_iter().map(Into::into));
        RunConfig::try_parse_from(argv)
    }

    /// Argument list that parses back to this configuration.
    pub fn to_argv(&self) -> Vec<String> {
        let mut v = Vec::new();
        match &self.command {
            Command::Trace => v.push("trace".into()),
            Command::Spectrum { window, rank_tol } => {
                v.push("spectrum".into());
                if let Some((a, b)) = window {
                    v.push("--window".into());
                    v.push(format!("{a},{b}"));
                }
                v.push("--rank-tol".into());
                v.push(rank_tol.to_string());
            }
            Command::Berezin { z, radii, angles } => {
                v.push("berezin".into());
                for p in z {
                    v.push(format!("--z={}", format_z(*p)));
                }
                if !radii.is_empty() {
                    v.push("--radii".into());
                    v.push(radii.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
                }
                v.push("--angles".into());
                v.push(angles.to_string());
            }
            Command::Matrix => v.push("matrix".into()),
            Command::Carleson { k, dims } => {
                v.push("carleson".into());
                v.push("--k".into());
                v.push(k.to_string());
                v.push("--dims".into());
                v.push(dims.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
            }
            Command::Verify { filter } => {
                v.push("verify".into());
                if let Some(f) = filter {
                    v.push(format!("--filter={f}"));
                }
            }
        }
        if let Some(s) = &self.symbol {
            v.push(format!("--symbol={s}"));
        }
        v.extend(["--dim".into(), self.dim.to_string(), "--tol".into(), self.tol.to_string()]);
        v.extend(["--format".into(), self.format.as_str().into()]);
        v
    }

    /// Checks everything that can be checked before numeric work starts.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::Config(format!("--dim must lie in 1..={MAX_DIM}, got {}", self.dim)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("--tol must be positive, got {}", self.tol)));
        }
        let needs_symbol = !matches!(self.command, Command::Verify { .. });
        if needs_symbol && self.symbol.is_none() {
            return Err(Error::Config("--symbol is required for this command".into()));
        }
        match &self.command {
            Command::Spectrum { window, rank_tol } => {
                if !(rank_tol.is_finite() && *rank_tol >= 0.0) {
                    return Err(Error::Config(format!("--rank-tol must be nonnegative, got {rank_tol}")));
                }
                if let Some((a, b)) = window {
                    if *b <= a + 4 || *b >= self.dim {
                        return Err(Error::Config(format!(
                            "--window {a},{b} needs n1 > n0 + 4 and n1 < dim = {}",
                            self.dim
                        )));
                    }
                }
            }
            Command::Berezin { z, radii, angles } => {
                if z.is_empty() && radii.is_empty() {
                    return Err(Error::Config("berezin needs --z or --radii".into()));
                }
                if !radii.is_empty() && *angles == 0 {
                    return Err(Error::Config("--angles must be positive".into()));
                }
                if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r >= 0.0 && **r < 1.0)) {
                    return Err(Error::Config(format!("grid radius {r} is outside [0, 1)")));
                }
                if let Some(p) = z.iter().find(|p| !(p.norm() < 1.0)) {
                    return Err(Error::Config(format!("point {} lies outside the disk", format_z(*p))));
                }
            }
            Command::Carleson { dims, .. } => {
                if dims.is_empty() || dims.windows(2).any(|w| w[0] >= w[1]) || dims[0] == 0 {
                    return Err(Error::Config("--dims must be positive and strictly increasing".into()));
                }
                if dims.iter().any(|&d| d > MAX_DIM) {
                    return Err(Error::Config(format!("--dims entries must not exceed {MAX_DIM}")));
                }
            }
            Command::Trace | Command::Matrix | Command::Verify { .. } => {}
        }
        Ok(())
    }

    /// The symbol from a file path or inline JSON.
    pub fn load_symbol(&self) -> Result<SymbolSpec> {
        let raw = self.symbol.as_deref().ok_or_else(|| Error::Config("--symbol is required".into()))?;
        if raw.trim_start().starts_with('{') {
            SymbolSpec::from_json(raw)
        } else {
            let text = std::fs::read_to_string(raw)
                .map_err(|e| Error::Config(format!("cannot read symbol file '{raw}': {e}")))?;
            SymbolSpec::from_json(&text)
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotTraceClass { .. } => 3,
        Error::NonConvergence { .. } | Error::NearSingular(_) => 2,
        Error::Contract(_)
        | Error::Unsupported(_)
        | Error::Boundary { .. }
        | Error::ResourceCap(_)
        | Error::Window(_)
        | Error::Config(_) => 1,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BerezinPoint {
    #[serde(with = "serde_complex")]
    pub z: Complex64,
    pub series: BerezinSample,
    pub matrix: BerezinSample,
}

#[derive(Debug, Clone, Serialize)]
pub struct BerezinReport {
    pub symbol: SymbolSpec,
    pub dim: usize,
    pub points: Vec<BerezinPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixExport {
    pub symbol: SymbolSpec,
    #[serde(flatten)]
    pub summary: MatrixSummary,
    /// Row-major entries `⟨T e_m, e_n⟩` at row `n`, column `m`.
    pub entries: Vec<Vec<ComplexCell>>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexCell {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlesonRow {
    pub dim: usize,
    pub top_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlesonReport {
    pub k: u32,
    pub finiteness: FinitenessReport,
    pub estimates: Vec<CarlesonRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumOutput {
    pub symbol: SymbolSpec,
    pub dim: usize,
    #[serde(flatten)]
    pub spectrum: SpectrumReport,
}

/// Written to standard output when the trace-class gate fails.
#[derive(Debug, Clone, Serialize)]
pub struct NotTraceClassReport {
    pub status: &'static str,
    pub symbol: SymbolSpec,
    /// `(α + β) / 2`.
    pub k: f64,
    pub finite: bool,
    pub divergence_exponent: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ErrorObject<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

/// Any report the CLI can emit.
#[derive(Debug, Clone)]
pub enum Report {
    Trace(TraceReport),
    Spectrum(SpectrumOutput),
    Berezin(BerezinReport),
    Matrix(MatrixExport),
    Carleson(CarlesonReport),
    Verify(SuiteReport),
    NotTraceClass(NotTraceClassReport),
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if !header.is_empty() {
        w.write_record(header).expect("writing to memory");
    }
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}

/// Shortest round-trip form, in exponent notation outside `[1e-5, 1e16)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Left-aligned first column, right-aligned remaining columns.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate().take(cols) {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            let pad = width[i] - c.chars().count();
            if i == 0 {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    out.push_str(&line(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("reports serialize");
    v.push(b'\n');
    v
}

/// Serializes a report. JSON keeps struct field order and writes floats as
/// shortest round-trip decimals; CSV layouts are listed per report in the README.
pub fn emit_report(report: &Report, format: Format) -> Vec<u8> {
    match (report, format) {
        (Report::Trace(r), Format::Json) => json_bytes(r),
        (Report::Spectrum(r), Format::Json) => json_bytes(r),
        (Report::Berezin(r), Format::Json) => json_bytes(r),
        (Report::Matrix(r), Format::Json) => json_bytes(r),
        (Report::Carleson(r), Format::Json) => json_bytes(r),
        (Report::Verify(r), Format::Json) => json_bytes(r),
        (Report::NotTraceClass(r), Format::Json) => json_bytes(r),

        (Report::Trace(r), f) => {
            let rows: Vec<Vec<String>> = r
                .routes()
                .into_iter()
                .map(|(name, v, e)| vec![name.to_string(), num(v.re), num(v.im), num(e)])
                .collect();
            if f == Format::Csv {
                csv_bytes(&["route", "re", "im", "error_estimate"], rows)
            } else {
                let mut s = table(&["route", "re", "im", "error_estimate"], &rows);
                s.push_str(&format!("trace {}  agree {}\n", num(r.trace.re), r.agree));
                s.into_bytes()
            }
        }
        (Report::Spectrum(r), f) => {
            let rows: Vec<Vec<String>> =
                r.spectrum.svals.iter().enumerate().map(|(n, s)| vec![n.to_string(), num(*s)]).collect();
            if f == Format::Csv {
                csv_bytes(&["n", "s_n"], rows)
            } else {
                let mut s = format!("numerical rank {} (rank_tol {})\n", r.spectrum.numerical_rank, r.spectrum.rank_tol);
                if let Some(fit) = &r.spectrum.fit {
                    s.push_str(&format!(
                        "fit window ({}, {}): C = {}, sigma = {}, residual = {}\n",
                        fit.window.0,
                        fit.window.1,
                        num(fit.c),
                        num(fit.sigma),
                        num(fit.residual)
                    ));
                }
                s.push_str(&table(&["n", "s_n"], &rows));
                s.into_bytes()
            }
        }
        (Report::Berezin(r), f) => {
            let header = ["z_re", "z_im", "series_re", "series_im", "series_err", "matrix_re", "matrix_im", "matrix_err"];
            let rows: Vec<Vec<String>> = r
                .points
                .iter()
                .map(|p| {
                    vec![
                        num(p.z.re),
                        num(p.z.im),
                        num(p.series.value.re),
                        num(p.series.value.im),
                        num(p.series.est_error),
                        num(p.matrix.value.re),
                        num(p.matrix.value.im),
                        num(p.matrix.est_error),
                    ]
                })
                .collect();
            if f == Format::Csv {
                csv_bytes(&header, rows)
            } else {
                table(&header, &rows).into_bytes()
            }
        }
        (Report::Matrix(r), f) => {
            let rows: Vec<Vec<String>> = r
                .entries
                .iter()
                .map(|row| row.iter().flat_map(|c| [num(c.re), num(c.im)]).collect())
                .collect();
            if f == Format::Csv {
                csv_bytes(&[], rows)
            } else {
                let mut s = format!("dim {}  hermitian {}  banded {}\n", r.summary.dim, r.summary.hermitian, r.summary.banded);
                for row in &r.entries {
                    let cells: Vec<String> = row.iter().map(|c| format!("{}{}{}i", num(c.re), if c.im.is_sign_negative() { "" } else { "+" }, num(c.im))).collect();
                    s.push_str(&cells.join("  "));
                    s.push('\n');
                }
                s.into_bytes()
            }
        }
        (Report::Carleson(r), f) => {
            let rows: Vec<Vec<String>> =
                r.estimates.iter().map(|e| vec![e.dim.to_string(), num(e.top_eigenvalue)]).collect();
            if f == Format::Csv {
                csv_bytes(&["dim", "top_eigenvalue"], rows)
            } else {
                let mut s = format!("k = {}  integral finite: {}", r.k, r.finiteness.finite);
                if let Some(v) = r.finiteness.value {
                    s.push_str(&format!(" (value {})", num(v)));
                }
                if let Some(e) = r.finiteness.divergence_exponent {
                    s.push_str(&format!(" (divergence exponent {})", num(e)));
                }
                s.push('\n');
                s.push_str(&table(&["dim", "top_eigenvalue"], &rows));
                s.into_bytes()
            }
        }
        (Report::Verify(r), f) => {
            let rows: Vec<Vec<String>> = r
                .results
                .iter()
                .map(|c| {
                    vec![
                        c.case.clone(),
                        c.instance.clone(),
                        if c.pass { "PASS" } else { "FAIL" }.to_string(),
                        num(c.reference.re),
                        opt(c.ratio_to_reference),
                    ]
                })
                .collect();
            let header = ["case", "instance", "result", "reference", "ratio_to_reference"];
            if f == Format::Csv {
                csv_bytes(&header, rows)
            } else {
                let mut s = table(&header, &rows);
                s.push_str(&format!("{}/{} passed\n", r.passed, r.total));
                s.into_bytes()
            }
        }
        (Report::NotTraceClass(r), f) => {
            let rows = vec![vec![num(r.k), r.finite.to_string(), num(r.divergence_exponent)]];
            if f == Format::Csv {
                csv_bytes(&["k", "finite", "divergence_exponent"], rows)
            } else {
                format!("not trace class: k = {}, divergence exponent {}\n", num(r.k), num(r.divergence_exponent))
                    .into_bytes()
            }
        }
    }
}

fn grid_points(z: &[Complex64], radii: &[f64], angles: usize) -> Vec<Complex64> {
    let mut pts = z.to_vec();
    for &r in radii {
        if r == 0.0 {
            pts.push(Complex64::new(0.0, 0.0));
            continue;
        }
        for j in 0..angles {
            pts.push(Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / angles as f64));
        }
    }
    pts
}

/// Runs a validated configuration.
pub fn dispatch(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    if let Command::Verify { filter } = &cfg.command {
        return Ok(Report::Verify(run_examples(filter.as_deref())));
    }
    let symbol = cfg.load_symbol()?;
    Ok(match &cfg.command {
        Command::Trace => Report::Trace(trace_report(&symbol, cfg.dim, cfg.tol)?),
        Command::Spectrum { window, rank_tol } => {
            let op = assemble(&symbol, cfg.dim)?;
            let mut spectrum = singular_values(&op, *rank_tol)?;
            spectrum.fit = match window {
                Some(w) => Some(decay_fit(&spectrum, *w)?),
                None => decay_fit(&spectrum, default_window(cfg.dim)).ok(),
            };
            Report::Spectrum(SpectrumOutput { symbol, dim: cfg.dim, spectrum })
        }
        Command::Berezin { z, radii, angles } => {
            let op = assemble(&symbol, cfg.dim)?;
            let points = grid_points(z, radii, *angles)
                .into_iter()
                .map(|p| {
                    Ok(BerezinPoint { z: p, series: berezin_series(&symbol, p, cfg.tol)?, matrix: berezin_matrix(&op, p)? })
                })
                .collect::<Result<Vec<_>>>()?;
            Report::Berezin(BerezinReport { symbol, dim: cfg.dim, points })
        }
        Command::Matrix => {
            let op = assemble(&symbol, cfg.dim)?;
            let entries = (0..op.dim)
                .map(|n| op.entries.row(n).iter().map(|c| ComplexCell { re: c.re, im: c.im }).collect())
                .collect();
            Report::Matrix(MatrixExport { symbol, summary: op.summary(), entries })
        }
        Command::Carleson { k, dims } => {
            let finiteness = carleson_integral(&symbol.base, *k)?;
            let estimates = carleson_bound_estimate(&symbol.base, *k, dims)?
                .into_iter()
                .map(|(dim, top_eigenvalue)| CarlesonRow { dim, top_eigenvalue })
                .collect();
            Report::Carleson(CarlesonReport { k: *k, finiteness, estimates })
        }
        Command::Verify { .. } => unreachable!("handled above"),
    })
}

fn write_error(err: &mut dyn Write, kind: &str, message: String, code: i32) {
    let obj = ErrorObject { error: kind, message, exit_code: code };
    let _ = writeln!(err, "{}", serde_json::to_string(&obj).expect("error objects serialize"));
}

/// Parses `args` (without the program name), runs the command and writes the
/// report to `out`. Returns the process exit code.
pub fn run<S: AsRef<str>>(args: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match RunConfig::parse_args(args.iter().map(|s| s.as_ref().to_string())) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            write_error(err, "usage", e.to_string().trim_end().to_string(), 1);
            return 1;
        }
    };
    let format = cfg.format;
    let result = dispatch(&cfg);
    match result {
        Ok(report) => {
            let code = match &report {
                Report::Verify(r) if !r.pass => 2,
                _ => 0,
            };
            let _ = out.write_all(&emit_report(&report, format));
            code
        }
        Err(e) => {
            let code = exit_code(&e);
            if let (Error::NotTraceClass { exponent }, Ok(symbol)) = (&e, cfg.load_symbol()) {
                let k = f64::from(symbol.alpha + symbol.beta) / 2.0;
                let report =
                    NotTraceClassReport { status: "not_trace_class", symbol, k, finite: false, divergence_exponent: *exponent };
                let _ = out.write_all(&emit_report(&Report::NotTraceClass(report), format));
            }
            write_error(err, e.kind(), e.to_string(), code);
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_formatting_round_trips() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(4.3220212908767705e-31), "4.3220212908767705e-31");
        assert_eq!(num(-2.5e17), "-2.5e17");
        for x in [1e-5, 3.0e-300, 123456.789, f64::MAX] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    const EX43: &str = r#"{"alpha":0,"beta":0,"measure":{"kind":"circle_radial_derivative","r0":0.5}}"#;

    #[test]
    fn trace_json_has_three_routes() {
        let (code, out, _) = run_str(&["trace", "--symbol", EX43, "--dim", "120"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        for key in ["route_matrix", "route_berezin", "route_closed_form", "agree"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let expected = -4.0 * 0.5 / 0.75f64.powi(3);
        assert!((v["route_closed_form"]["re"].as_f64().unwrap() - expected).abs() < 1e-12);
        assert!((v["route_matrix"]["value"]["re"].as_f64().unwrap() - expected).abs() < 1e-8);
        assert!((v["route_berezin"]["value"]["re"].as_f64().unwrap() - expected).abs() < 1e-5);
        assert_eq!(v["agree"], true);
    }

    #[test]
    fn divergent_symbol_exits_with_three() {
        let sym = r#"{"alpha":1,"beta":1,"measure":{"kind":"radial_power","s":2,"a":0}}"#;
        let (code, out, err) = run_str(&["trace", "--symbol", sym]);
        assert_eq!(code, 3);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["divergence_exponent"], -2.0);
        let e: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(e["error"], "not_trace_class");
        assert_eq!(e["exit_code"], 3);
    }

    #[test]
    fn usage_and_config_errors_exit_with_one() {
        assert_eq!(run_str(&["frobnicate"]).0, 1);
        assert_eq!(run_str(&["trace"]).0, 1);
        assert_eq!(run_str(&["trace", "--symbol", EX43, "--dim", "0"]).0, 1);
        assert_eq!(run_str(&["trace", "--symbol", EX43, "--tol", "-1"]).0, 1);
        let typo = r#"{"alpha":0,"beta":0,"measure":{"kind":"circle_uniform","r":0.5}}"#;
        let (code, _, err) = run_str(&["trace", "--symbol", typo]);
        assert_eq!(code, 1);
        assert!(err.contains("\"error\":\"config\""));
        assert_eq!(run_str(&["trace", "--symbol", "/no/such/file.json"]).0, 1);
        assert_eq!(run_str(&["berezin", "--symbol", EX43, "--z", "1.5+0i"]).0, 1);
        assert_eq!(run_str(&["carleson", "--symbol", EX43, "--k", "0", "--dims", "8,4"]).0, 1);
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("verify"));
    }

    #[test]
    fn spectrum_csv_columns() {
        let sym = r#"{"alpha":0,"beta":0,"measure":{"kind":"circle_uniform","r0":0.5}}"#;
        let (code, out, _) = run_str(&["spectrum", "--symbol", sym, "--dim", "8", "--format", "csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "n,s_n");
        assert_eq!(lines[1], "0,1");
        assert_eq!(lines[2], "1,0.5");
        assert_eq!(lines.len(), 9);
    }

    #[test]
    fn matrix_csv_is_row_major_pairs() {
        let sym = r#"{"alpha":0,"beta":0,"measure":{"kind":"point_mass","re":0.5,"im":0}}"#;
        let (code, out, _) = run_str(&["matrix", "--symbol", sym, "--dim", "3", "--format", "csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 3);
        // Row n, column m holds √(n+1) √(m+1) 0.5^(n+m).
        let cells: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(cells.len(), 6);
        assert!((cells[0] - 2f64.sqrt() * 0.5).abs() < 1e-15);
        assert!((cells[4] - 2f64.sqrt() * 3f64.sqrt() * 0.125).abs() < 1e-15);
        assert_eq!(cells[1], 0.0);
    }

    #[test]
    fn berezin_grid_and_points() {
        let sym = r#"{"alpha":0,"beta":0,"measure":{"kind":"point_mass","re":0.5,"im":0}}"#;
        let (code, out, _) =
            run_str(&["berezin", "--symbol", sym, "--dim", "64", "--z", "0.1-0.2i", "--radii", "0,0.3", "--angles", "4"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 1 + 1 + 4);
        assert_eq!(pts[0]["z"]["im"], -0.2);
        for p in pts {
            let d = p["series"]["value"]["re"].as_f64().unwrap() - p["matrix"]["value"]["re"].as_f64().unwrap();
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn carleson_report() {
        let sym = r#"{"alpha":0,"beta":0,"measure":{"kind":"radial_power","s":0,"a":0}}"#;
        let (code, out, _) = run_str(&["carleson", "--symbol", sym, "--k", "0", "--dims", "8,16", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, "dim,top_eigenvalue\n8,1\n16,1\n");
    }

    #[test]
    fn verify_text_table() {
        let (code, out, _) = run_str(&["verify", "--filter", "ex43", "--format", "text"]);
        assert_eq!(code, 0);
        assert!(out.contains("ex43-trace"));
        assert!(out.contains("PASS"));
        assert!(out.ends_with("3/3 passed\n"));
    }

    #[test]
    fn output_is_deterministic() {
        let a = run_str(&["trace", "--symbol", EX43, "--dim", "64"]);
        let b = run_str(&["trace", "--symbol", EX43, "--dim", "64"]);
        assert_eq!(a, b);
    }

    fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
        lo..hi
    }

    fn command() -> impl Strategy<Value = Command> {
        prop_oneof![
            Just(Command::Trace),
            Just(Command::Matrix),
            (proptest::option::of((0usize..50, 5usize..40)), finite(0.0, 1.0)).prop_map(|(w, rank_tol)| {
                Command::Spectrum { window: w.map(|(a, d)| (a, a + d)), rank_tol }
            }),
            (
                proptest::collection::vec((finite(-0.7, 0.7), finite(-0.7, 0.7)), 0..3),
                proptest::collection::vec(finite(0.0, 0.99), 0..3),
                1usize..16
            )
                .prop_map(|(z, radii, angles)| Command::Berezin {
                    z: z.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
                    radii,
                    angles
                }),
            (0u32..5, proptest::collection::btree_set(1usize..300, 1..5))
                .prop_map(|(k, dims)| Command::Carleson { k, dims: dims.into_iter().collect() }),
            proptest::option::of("[a-z0-9-]{1,12}").prop_map(|filter| Command::Verify { filter }),
        ]
    }

    fn config() -> impl Strategy<Value = RunConfig> {
        (
            command(),
            proptest::option::of(prop_oneof![Just(EX43.to_string()), "[a-z/]{1,10}\\.json"]),
            1usize..4096,
            finite(1e-14, 1e-2),
            prop_oneof![Just(Format::Json), Just(Format::Csv), Just(Format::Text)],
        )
            .prop_map(|(command, symbol, dim, tol, format)| RunConfig { command, symbol, dim, tol, format })
    }

    proptest! {
        #[test]
        fn argv_round_trip(cfg in config()) {
            let parsed = RunConfig::parse_args(cfg.to_argv()).unwrap();
            prop_assert_eq!(parsed, cfg);
        }
    }
}
