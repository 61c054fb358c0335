//! Python module `bergtrace`.

use bergtrace_core::{berezin, operator, spectral, verify, Error, SymbolSpec, TruncatedOperator};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(bergtrace, BergtraceError, PyException);
create_exception!(bergtrace, NotTraceClassError, BergtraceError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NotTraceClass { .. } => NotTraceClassError::new_err(e.to_string()),
        _ => BergtraceError::new_err(format!("{}: {e}", e.kind())),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| BergtraceError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A derivative pairing `(α, β)` of a base measure, parsed from the JSON schema.
#[pyclass(name = "Symbol", frozen)]
struct PySymbol {
    inner: SymbolSpec,
}

#[pymethods]
impl PySymbol {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        Ok(Self { inner: SymbolSpec::from_json(json).map_err(to_py)? })
    }

    #[getter]
    fn alpha(&self) -> u32 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> u32 {
        self.inner.beta
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn adjoint(&self) -> Self {
        Self { inner: operator::adjoint_symbol(&self.inner) }
    }

    fn __repr__(&self) -> String {
        format!("Symbol({})", self.inner.to_json())
    }
}

/// Leading `dim × dim` block of the operator in the orthonormal monomial basis.
#[pyclass(name = "Operator", frozen)]
struct PyOperator {
    inner: TruncatedOperator,
}

#[pymethods]
impl PyOperator {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn hermitian(&self) -> bool {
        self.inner.hermitian
    }

    #[getter]
    fn banded(&self) -> bool {
        self.inner.banded
    }

    /// Row-major nested list of complex entries.
    fn entries(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.dim).map(|n| self.inner.entries.row(n).to_vec()).collect()
    }

    fn trace(&self) -> Complex64 {
        self.inner.entries.trace()
    }

    fn __repr__(&self) -> String {
        format!("Operator(dim={}, hermitian={}, banded={})", self.inner.dim, self.inner.hermitian, self.inner.banded)
    }
}

#[pyfunction]
fn assemble(symbol: &PySymbol, dim: usize) -> PyResult<PyOperator> {
    Ok(PyOperator { inner: operator::assemble(&symbol.inner, dim).map_err(to_py)? })
}

#[pyfunction]
#[pyo3(signature = (symbol, dim = 256, tol = 1e-8))]
fn trace_report<'py>(py: Python<'py>, symbol: &PySymbol, dim: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| spectral::trace_report(&symbol.inner, dim, tol)).map_err(to_py)?;
    to_dict(py, &report)
}

/// Returns `(value, error_estimate)`.
#[pyfunction]
#[pyo3(signature = (symbol, z, tol = 1e-12))]
fn berezin_series(symbol: &PySymbol, z: Complex64, tol: f64) -> PyResult<(Complex64, f64)> {
    let s = berezin::berezin_series(&symbol.inner, z, tol).map_err(to_py)?;
    Ok((s.value, s.est_error))
}

/// Returns `(value, error_estimate)`.
#[pyfunction]
fn berezin_matrix(op: &PyOperator, z: Complex64) -> PyResult<(Complex64, f64)> {
    let s = berezin::berezin_matrix(&op.inner, z).map_err(to_py)?;
    Ok((s.value, s.est_error))
}

#[pyfunction]
#[pyo3(signature = (op, rank_tol = 1e-12, window = None))]
fn spectrum<'py>(
    py: Python<'py>,
    op: &PyOperator,
    rank_tol: f64,
    window: Option<(usize, usize)>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut report = py.detach(|| spectral::singular_values(&op.inner, rank_tol)).map_err(to_py)?;
    if let Some(w) = window {
        report.fit = Some(spectral::decay_fit(&report, w).map_err(to_py)?);
    }
    to_dict(py, &report)
}

/// `[(dim, top_eigenvalue), ...]` for the order-`k` probe of the symbol's base measure.
#[pyfunction]
fn carleson_bound_estimate(symbol: &PySymbol, k: u32, dims: Vec<usize>) -> PyResult<Vec<(usize, f64)>> {
    spectral::carleson_bound_estimate(&symbol.inner.base, k, &dims).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (filter = None))]
fn run_examples<'py>(py: Python<'py>, filter: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| verify::run_examples(filter));
    to_dict(py, &report)
}

#[pymodule]
fn bergtrace(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymbol>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(assemble, m)?)?;
    m.add_function(wrap_pyfunction!(trace_report, m)?)?;
    m.add_function(wrap_pyfunction!(berezin_series, m)?)?;
    m.add_function(wrap_pyfunction!(berezin_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(carleson_bound_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(run_examples, m)?)?;
    m.add("BergtraceError", m.py().get_type::<BergtraceError>())?;
    m.add("NotTraceClassError", m.py().get_type::<NotTraceClassError>())?;
    Ok(())
}
