//! Python module `qleg`: family evaluation, spectra and the verification suites.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qleg_core::families::{self, BigQJacobiParams, DualQKrawtchoukParams, MonicPath};
use qleg_core::operator::{self, Gauge, TruncatedRep};
use qleg_core::qcore::{qpochhammer_finite, qpochhammer_infinite};
use qleg_core::suites::{self, Suite, SuiteConfig};
use qleg_core::{DoubleDouble, Error, Precision, QBase, Real, VerificationReport};

create_exception!(qleg, NonConvergenceError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NonConvergence { .. } => NonConvergenceError::new_err(e.to_string()),
        Error::IllConditioned { .. } | Error::EigensolveFailure(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn base<R: Real>(q: f64) -> Result<QBase<R>, Error> {
    QBase::new(q)
}

/// Runs `f` in double precision, or in double-double when `extended` is set.
fn eval_in(extended: bool, f: impl Fn(Kind) -> Result<f64, Error>) -> PyResult<f64> {
    f(if extended { Kind::Extended } else { Kind::Double }).map_err(to_py)
}

#[derive(Clone, Copy)]
enum Kind {
    Double,
    Extended,
}

macro_rules! in_precision {
    ($kind:expr, |$r:ident| $body:expr) => {
        match $kind {
            Kind::Double => {
                #[allow(unused)]
                let $r = |v: f64| v;
                ($body).map(|v: f64| v)
            }
            Kind::Extended => {
                let $r = DoubleDouble::from;
                ($body).map(|v: DoubleDouble| v.to_f64())
            }
        }
    };
}

/// `P_n(x; a, b, c, d; q)`.
#[pyfunction]
#[pyo3(signature = (n, x, a, b, c, d, q, extended = false))]
#[allow(clippy::too_many_arguments)]
fn big_q_jacobi(n: usize, x: f64, a: f64, b: f64, c: f64, d: f64, q: f64, extended: bool) -> PyResult<f64> {
    eval_in(extended, |k| {
        in_precision!(k, |r| {
            base(q).and_then(|bs| families::big_q_jacobi(n, r(x), &BigQJacobiParams::new(r(a), r(b), r(c), r(d), bs)))
        })
    })
}

/// `P_n(x; 1, 1, c, d; q)`.
#[pyfunction]
#[pyo3(signature = (n, x, c, d, q, extended = false))]
fn big_q_legendre(n: usize, x: f64, c: f64, d: f64, q: f64, extended: bool) -> PyResult<f64> {
    eval_in(extended, |k| in_precision!(k, |r| base(q).and_then(|bs| families::big_q_legendre(n, r(x), r(c), r(d), &bs))))
}

/// Monic `P̂_n(x; 0, 0, c, d; q)`; `path` is one of auto, series-c, series-d, recurrence.
#[pyfunction]
#[pyo3(signature = (n, x, c, d, q, path = "auto", extended = false))]
fn monic_big_q_jacobi00(n: usize, x: f64, c: f64, d: f64, q: f64, path: &str, extended: bool) -> PyResult<f64> {
    let path: MonicPath = path.parse().map_err(|e: String| PyValueError::new_err(e))?;
    eval_in(extended, |k| {
        in_precision!(k, |r| base(q).and_then(|bs| families::monic_big_q_jacobi00(n, r(x), r(c), r(d), &bs, path)))
    })
}

/// `p_n(x; a, b; q)`.
#[pyfunction]
#[pyo3(signature = (n, x, a, b, q, extended = false))]
fn little_q_jacobi(n: usize, x: f64, a: f64, b: f64, q: f64, extended: bool) -> PyResult<f64> {
    eval_in(extended, |k| in_precision!(k, |r| base(q).and_then(|bs| families::little_q_jacobi(n, r(x), r(a), r(b), &bs))))
}

/// `R_n(λ(x); s, N; q)` at the lattice index `x`.
#[pyfunction]
#[pyo3(signature = (n, x, s, big_n, q, extended = false))]
fn dual_q_krawtchouk(n: usize, x: usize, s: f64, big_n: usize, q: f64, extended: bool) -> PyResult<f64> {
    eval_in(extended, |k| {
        in_precision!(k, |r| base(q)
            .and_then(|bs| DualQKrawtchoukParams::new(r(s), big_n, bs))
            .and_then(|p| families::dual_q_krawtchouk(n, x, &p)))
    })
}

/// `c_n(x; a; q)`.
#[pyfunction]
#[pyo3(signature = (n, x, a, q, extended = false))]
fn q_charlier(n: usize, x: f64, a: f64, q: f64, extended: bool) -> PyResult<f64> {
    eval_in(extended, |k| in_precision!(k, |r| base(q).and_then(|bs| families::q_charlier(n, r(x), r(a), &bs))))
}

/// `(a; q)_n`, or `(a; q)_∞` when `n` is omitted.
#[pyfunction]
#[pyo3(signature = (a, q, n = None))]
fn qpochhammer(a: f64, q: f64, n: Option<usize>) -> PyResult<f64> {
    let bs = base::<f64>(q).map_err(to_py)?;
    match n {
        Some(n) => Ok(qpochhammer_finite(a, &bs, n)),
        None => qpochhammer_infinite(a, &bs).map_err(to_py),
    }
}

fn truncated(sigma: f64, q: f64, dim: usize, gauge: &str) -> PyResult<TruncatedRep> {
    let gauge = match gauge {
        "real" => Gauge::RealGauged,
        "complex" => Gauge::Complex,
        other => return Err(PyValueError::new_err(format!("unknown gauge '{other}'"))),
    };
    TruncatedRep::new(dim, sigma, base(q).map_err(to_py)?, gauge).map_err(to_py)
}

/// Ascending eigenvalues of the truncated operator.
#[pyfunction]
#[pyo3(signature = (sigma, q, dim, gauge = "real"))]
fn eigenvalues(sigma: f64, q: f64, dim: usize, gauge: &str) -> PyResult<Vec<f64>> {
    operator::eigenvalues(&truncated(sigma, q, dim, gauge)?).map_err(to_py)
}

/// The first `count` points `(lambda, branch, x)` of the discrete spectrum.
#[pyfunction]
fn predicted_spectrum(sigma: f64, q: f64, count: usize) -> PyResult<Vec<(f64, &'static str, usize)>> {
    let pts = operator::predicted_spectrum(sigma, &base(q).map_err(to_py)?, count).map_err(to_py)?;
    Ok(pts.into_iter().map(|p| (p.lambda, p.branch.as_str(), p.x)).collect())
}

/// Compares computed eigenvalues with the predicted spectrum.
#[pyfunction]
#[pyo3(signature = (sigma, q, dim, count, tolerance = 1e-10, gauge = "real"))]
fn spectrum_check(sigma: f64, q: f64, dim: usize, count: usize, tolerance: f64, gauge: &str) -> PyResult<Vec<Report>> {
    let reports = operator::spectrum_check(&truncated(sigma, q, dim, gauge)?, count, tolerance).map_err(to_py)?;
    Ok(reports.into_iter().map(Report).collect())
}

/// One identity check.
#[pyclass(frozen, module = "qleg")]
struct Report(VerificationReport);

#[pymethods]
impl Report {
    #[getter]
    fn identity_id(&self) -> String {
        self.0.identity_id.to_string()
    }
    /// Parameters as `k=v` pairs.
    #[getter]
    fn params(&self) -> String {
        self.0.params.to_string()
    }
    #[getter]
    fn lhs(&self) -> f64 {
        self.0.lhs
    }
    #[getter]
    fn rhs(&self) -> f64 {
        self.0.rhs
    }
    #[getter]
    fn abs_residual(&self) -> f64 {
        self.0.abs_residual
    }
    #[getter]
    fn rel_residual(&self) -> f64 {
        self.0.rel_residual
    }
    #[getter]
    fn tolerance(&self) -> f64 {
        self.0.tolerance
    }
    #[getter]
    fn passed(&self) -> bool {
        self.0.passed
    }
    #[getter]
    fn precision(&self) -> String {
        self.0.truncation.precision.to_string()
    }

    /// The report as one JSON object, as written by `qleg verify`.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __bool__(&self) -> bool {
        self.0.passed
    }

    fn __repr__(&self) -> String {
        format!("<Report {}>", self.0)
    }
}

/// Runs one named suite, or every suite for `"all"`.
#[pyfunction]
#[pyo3(signature = (
    name, seed = suites::DEFAULT_SEED, tolerance = None, precision = None,
    l = None, p = None, q = None, c = None, d = None, x = None, sigma = None, dim = None,
))]
#[allow(clippy::too_many_arguments)]
fn run_suite(
    py: Python<'_>,
    name: &str,
    seed: u64,
    tolerance: Option<f64>,
    precision: Option<&str>,
    l: Option<usize>,
    p: Option<usize>,
    q: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
    x: Option<f64>,
    sigma: Option<f64>,
    dim: Option<usize>,
) -> PyResult<Vec<Report>> {
    let precision = precision
        .map(|s| s.parse::<Precision>().map_err(|e| PyValueError::new_err(e.to_string())))
        .transpose()?;
    let cfg = SuiteConfig { seed, precision, tolerance, l, p, q, c, d, x, sigma, dim };
    let reports = if name == "all" {
        py.detach(|| suites::run_all(&cfg))
    } else {
        let suite: Suite = name.parse().map_err(|e: String| PyValueError::new_err(e))?;
        py.detach(|| suites::run_suite(suite, &cfg))
    }
    .map_err(to_py)?;
    Ok(reports.into_iter().map(Report).collect())
}

#[pyfunction]
fn suite_names() -> Vec<&'static str> {
    Suite::ALL.iter().map(Suite::as_str).collect()
}

#[pymodule]
#[pyo3(name = "qleg")]
fn qleg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    m.add("DEFAULT_SEED", suites::DEFAULT_SEED)?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(big_q_jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(big_q_legendre, m)?)?;
    m.add_function(wrap_pyfunction!(monic_big_q_jacobi00, m)?)?;
    m.add_function(wrap_pyfunction!(little_q_jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(dual_q_krawtchouk, m)?)?;
    m.add_function(wrap_pyfunction!(q_charlier, m)?)?;
    m.add_function(wrap_pyfunction!(qpochhammer, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_matches_double() {
        let a = big_q_legendre(3, 0.2, 1.0, 0.5, 0.4, false).unwrap();
        let b = big_q_legendre(3, 0.2, 1.0, 0.5, 0.4, true).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn qpochhammer_finite_and_infinite() {
        assert_eq!(qpochhammer(0.5, 0.5, Some(2)).unwrap(), 0.375);
        let inf = qpochhammer(0.5, 0.5, None).unwrap();
        assert!((inf - 0.288_788_095_086_602_4).abs() < 1e-15);
    }

    #[test]
    fn spectrum_is_listed_by_magnitude() {
        let pts = predicted_spectrum(0.0, 0.5, 4).unwrap();
        let lambdas: Vec<f64> = pts.iter().map(|p| p.0).collect();
        assert_eq!(lambdas, [-1.0, 1.0, -0.25, 0.25]);
    }

    #[test]
    fn suite_names_parse_back() {
        for name in suite_names() {
            assert!(name.parse::<Suite>().is_ok(), "{name}");
        }
    }
}
