//! Python bindings for `sew-core`.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::Serialize;
use sew_core::entropy::{self, LogFactor};
use sew_core::harmonics::{BasisSlice, BlockSelection};
use sew_core::norms::{self, InducedNorm};
use sew_core::spectra::{ratio_check, weyl_ratio};
use sew_core::widths::{self, ApproxRule, SweepConfig};
use sew_core::{Exponent, ManifoldModel, SewError};

create_exception!(sew, Error, PyValueError, "Error raised by a sew routine.");
create_exception!(sew, HypothesisViolation, Error, "A theorem hypothesis does not hold.");

fn py_err(e: SewError) -> PyErr {
    if e.is_hypothesis_violation() {
        HypothesisViolation::new_err(e.to_string())
    } else {
        Error::new_err(e.to_string())
    }
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for sew_core::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Converts any serializable report into plain Python objects.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| Error::new_err(e.to_string()))?;
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (text,))?.unbind())
}

/// Accepts `2`, `2.5`, `float("inf")`, `"inf"` or `"4"`.
fn exponent(obj: &Bound<'_, PyAny>) -> PyResult<Exponent> {
    if let Ok(s) = obj.cast::<PyString>() {
        return s.to_str()?.parse().or_raise();
    }
    Exponent::new(obj.extract::<f64>()?).or_raise()
}

fn manifold_of(obj: &Bound<'_, PyAny>) -> PyResult<ManifoldModel> {
    if let Ok(m) = obj.extract::<PyRef<'_, Manifold>>() {
        return Ok(m.inner);
    }
    obj.extract::<String>()?.parse().or_raise()
}

fn extended_allocation(
    model: ManifoldModel,
    n: usize,
    gamma: f64,
    q: Exponent,
    epsilon: Option<f64>,
) -> sew_core::Result<(sew_core::Spectrum, widths::BlockAllocation)> {
    let mut s = sew_core::spectrum(model, 4 * n.max(1))?;
    loop {
        match widths::allocate_ranks(&s, n, gamma, model.dim(), q, epsilon) {
            Err(SewError::ExtendSpectrum { needed, .. }) => s = sew_core::spectrum(model, needed)?,
            other => return other.map(|a| (s, a)),
        }
    }
}

/// A compact homogeneous manifold: `"circle"`, `"sphereD"` or `"torusD"`.
#[pyclass(frozen, module = "sew")]
struct Manifold {
    inner: ManifoldModel,
}

#[pymethods]
impl Manifold {
    #[new]
    fn new(label: &str) -> PyResult<Self> {
        Ok(Manifold { inner: label.parse().or_raise()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    #[getter]
    fn total_measure(&self) -> f64 {
        self.inner.total_measure()
    }

    fn __repr__(&self) -> String {
        format!("Manifold('{}')", self.inner.label())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Eigenvalues, multiplicities and cumulative dimensions of the Laplace–Beltrami operator.
#[pyclass(frozen, module = "sew")]
struct Spectrum {
    inner: Arc<sew_core::Spectrum>,
}

#[pymethods]
impl Spectrum {
    #[new]
    fn new(manifold: &Bound<'_, PyAny>, n_max: usize) -> PyResult<Self> {
        let model = manifold_of(manifold)?;
        Ok(Spectrum { inner: Arc::new(sew_core::spectrum(model, n_max).or_raise()?) })
    }

    #[getter]
    fn manifold(&self) -> Manifold {
        Manifold { inner: self.inner.model() }
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<u64> {
        self.inner.eigenvalues().to_vec()
    }

    #[getter]
    fn multiplicities(&self) -> Vec<u64> {
        self.inner.multiplicities().to_vec()
    }

    #[getter]
    fn cumulative_dims(&self) -> Vec<u64> {
        self.inner.cumulative_dims().to_vec()
    }

    /// Number of eigenvalues, with multiplicity, strictly below `a`.
    fn counting_function(&self, a: f64) -> usize {
        self.inner.counting_function(a)
    }

    fn weyl_ratio(&self, a: f64) -> PyResult<f64> {
        weyl_ratio(&self.inner, a).or_raise()
    }

    /// `(θ_{n+1}/θ_n, τ_{n+1}/τ_n)`, both tending to 1.
    fn ratio_check(&self, n: usize) -> PyResult<(f64, f64)> {
        ratio_check(&self.inner, n).or_raise()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum('{}', n_max={})", self.inner.model().label(), self.inner.n_max())
    }
}

/// `‖α‖ = ‖Σ α_i η_i‖_p` on the span of the chosen eigenspace blocks.
#[pyclass(frozen, module = "sew")]
struct Norm {
    inner: InducedNorm,
}

#[pymethods]
impl Norm {
    #[new]
    fn new(manifold: &Bound<'_, PyAny>, blocks: Vec<usize>, p: &Bound<'_, PyAny>) -> PyResult<Self> {
        let model = manifold_of(manifold)?;
        let p = exponent(p)?;
        let top = blocks.iter().copied().max().unwrap_or(0);
        let s = sew_core::spectrum(model, top).or_raise()?;
        let sel = BlockSelection::new(&s, blocks).or_raise()?;
        let basis = BasisSlice::on_default_grid(model, &sel).or_raise()?;
        Ok(Norm { inner: InducedNorm::new(Arc::new(basis), p) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.exponent().value()
    }

    fn __call__(&self, alpha: Vec<f64>) -> PyResult<f64> {
        norms::induced_norm(&alpha, &self.inner).or_raise()
    }

    /// `sup ⟨α, β⟩` over the unit ball.
    #[pyo3(signature = (alpha, tol = 1e-9))]
    fn dual(&self, alpha: Vec<f64>, tol: f64) -> PyResult<f64> {
        norms::dual_norm(&alpha, &self.inner, tol).or_raise()
    }

    fn holder_bound(&self, alpha: Vec<f64>) -> PyResult<f64> {
        norms::holder_bound(&alpha, &self.inner).or_raise()
    }

    #[pyo3(signature = (samples = 100_000, seed = 0))]
    fn levy_mean(&self, py: Python<'_>, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
        let est = py.detach(|| norms::levy_mean(&self.inner, samples, seed)).or_raise()?;
        to_py(py, &est)
    }

    #[pyo3(signature = (samples = 10_000, seed = 0, tol = 1e-9))]
    fn dual_levy_mean(&self, py: Python<'_>, samples: usize, seed: u64, tol: f64) -> PyResult<Py<PyAny>> {
        let est = py.detach(|| norms::dual_levy_mean(&self.inner, samples, seed, tol)).or_raise()?;
        to_py(py, &est)
    }

    /// `(Vol B / Vol B₂)^{1/n}`, of the polar body when `dual` is set.
    #[pyo3(signature = (samples = 20_000, seed = 0, dual = false, tol = 1e-9))]
    fn volume_ratio(&self, py: Python<'_>, samples: usize, seed: u64, dual: bool, tol: f64) -> PyResult<Py<PyAny>> {
        let est = py
            .detach(|| {
                if dual {
                    entropy::dual_volume_ratio(&self.inner, samples, seed, tol)
                } else {
                    entropy::volume_ratio(&self.inner, samples, seed)
                }
            })
            .or_raise()?;
        to_py(py, &est)
    }
}

#[pyfunction]
fn entropy_lower_bound(detroot: f64, m_x: f64, m_ydual: f64, k: usize, n: usize) -> PyResult<f64> {
    entropy::entropy_lower_bound(detroot, m_x, m_ydual, k, n).or_raise()
}

#[pyfunction]
fn sobolev_entropy_lower(n: usize, gamma: f64, d: usize, p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>) -> PyResult<f64> {
    entropy::sobolev_entropy_lower(n, gamma, d, exponent(p)?, exponent(q)?).or_raise()
}

#[pyfunction]
fn sobolev_entropy_upper(n: usize, gamma: f64, d: usize, p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>) -> PyResult<f64> {
    entropy::sobolev_entropy_upper(n, gamma, d, exponent(p)?, exponent(q)?).or_raise()
}

/// Entropy bounds from a nonincreasing width sequence; `log_factor` is `"none"` or
/// `"inverse-sqrt-log"`.
#[pyfunction]
#[pyo3(signature = (widths, gamma_over_d, log_factor = "none"))]
fn carl_transfer(py: Python<'_>, widths: Vec<f64>, gamma_over_d: f64, log_factor: &str) -> PyResult<Py<PyAny>> {
    let lf: LogFactor = log_factor.parse().or_raise()?;
    to_py(py, &entropy::carl_transfer(&widths, gamma_over_d, lf).or_raise()?)
}

#[pyfunction]
fn width_bounds(py: Python<'_>, n: usize, gamma: f64, d: usize, p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    to_py(py, &widths::width_bounds(n, gamma, d, exponent(p)?, exponent(q)?).or_raise()?)
}

#[pyfunction]
fn admissible_epsilon(gamma: f64, d: usize, q: &Bound<'_, PyAny>) -> PyResult<f64> {
    widths::admissible_epsilon(gamma, d, exponent(q)?).or_raise()
}

/// Dyadic block allocation for base degree `n`, with its invariant check.
#[pyfunction]
#[pyo3(signature = (manifold, n, gamma, q = None, epsilon = None))]
fn allocate_ranks(
    py: Python<'_>,
    manifold: &Bound<'_, PyAny>,
    n: usize,
    gamma: f64,
    q: Option<&Bound<'_, PyAny>>,
    epsilon: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let model = manifold_of(manifold)?;
    let q = q.map(exponent).transpose()?.unwrap_or(Exponent::Finite(2.0));
    let (s, alloc) = extended_allocation(model, n, gamma, q, epsilon).or_raise()?;
    let check = alloc.check(&s);
    to_py(py, &serde_json::json!({ "allocation": alloc, "check": check, "all_hold": check.all() }))
}

/// Sup and mean error of the block approximant over sampled members of the Sobolev ball.
#[pyfunction]
#[pyo3(signature = (manifold, gamma, bases, q = None, samples = 100, seed = 0, rule = "truncate", draws = 8, epsilon = None, truncation = 4))]
#[allow(clippy::too_many_arguments)]
fn approximation_sweep(
    py: Python<'_>,
    manifold: &Bound<'_, PyAny>,
    gamma: f64,
    bases: Vec<usize>,
    q: Option<&Bound<'_, PyAny>>,
    samples: usize,
    seed: u64,
    rule: &str,
    draws: usize,
    epsilon: Option<f64>,
    truncation: usize,
) -> PyResult<Py<PyAny>> {
    let rule = match rule {
        "truncate" => ApproxRule::Truncate,
        "random-subspace" => ApproxRule::RandomSubspace { draws, seed },
        other => return Err(Error::new_err(format!("unknown rule '{other}'"))),
    };
    let cfg = SweepConfig {
        model: manifold_of(manifold)?,
        gamma,
        q: q.map(exponent).transpose()?.unwrap_or(Exponent::Finite(2.0)),
        bases,
        samples,
        seed,
        rule,
        epsilon,
        truncation,
    };
    let points = py.detach(|| widths::approximation_sweep(&cfg)).or_raise()?;
    let slope = widths::sweep_slope(&points);
    to_py(py, &serde_json::json!({ "points": points, "log_log_slope": slope }))
}

#[pyfunction]
#[pyo3(signature = (n, q_prime, lambda_, trials = 200, seed = 0))]
fn ptj_check(py: Python<'_>, n: usize, q_prime: &Bound<'_, PyAny>, lambda_: f64, trials: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let q_prime = exponent(q_prime)?;
    let rep = py.detach(|| widths::ptj_check(n, q_prime, lambda_, trials, seed)).or_raise()?;
    to_py(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (manifold, degree, gamma, q = None, samples = 1000, seed = 0))]
fn bernstein_check(
    py: Python<'_>,
    manifold: &Bound<'_, PyAny>,
    degree: usize,
    gamma: f64,
    q: Option<&Bound<'_, PyAny>>,
    samples: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let model = manifold_of(manifold)?;
    let q = q.map(exponent).transpose()?.unwrap_or(Exponent::Finite(2.0));
    let s = sew_core::spectrum(model, degree).or_raise()?;
    to_py(py, &widths::bernstein_check(&s, degree, gamma, q, samples, seed).or_raise()?)
}

#[pymodule]
fn sew(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("Error", py.get_type::<Error>())?;
    m.add("HypothesisViolation", py.get_type::<HypothesisViolation>())?;
    m.add_class::<Manifold>()?;
    m.add_class::<Spectrum>()?;
    m.add_class::<Norm>()?;
    m.add_function(wrap_pyfunction!(entropy_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_entropy_lower, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_entropy_upper, m)?)?;
    m.add_function(wrap_pyfunction!(carl_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(width_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(allocate_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(approximation_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(ptj_check, m)?)?;
    m.add_function(wrap_pyfunction!(bernstein_check, m)?)?;
    Ok(())
}
