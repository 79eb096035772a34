//! Python bindings: `import pycfmoll`.
//!
//! Validation failures raise `ValueError`; numeric failures raise
//! `pycfmoll.NumericError`.

use cfmoll::converge::convergence_certificate_with;
use cfmoll::{
    CharFn, ConvergenceReport, DensityField, DistributionSpec, Error, Grid, Integrability, MollificationParams,
};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(pycfmoll, NumericError, PyArithmeticError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numeric(m) => NumericError::new_err(m),
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for cfmoll::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// A law on R^d described by the JSON schema shared with the CLI.
#[pyclass(name = "DistributionSpec", module = "pycfmoll", frozen)]
struct PySpec {
    inner: DistributionSpec,
}

#[pymethods]
impl PySpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySpec {
            inner: DistributionSpec::from_json_str(text).py()?,
        })
    }

    #[staticmethod]
    fn standard_normal(d: usize) -> Self {
        PySpec {
            inner: DistributionSpec::standard_normal(d),
        }
    }

    #[staticmethod]
    fn point_mass(location: Vec<f64>) -> Self {
        PySpec {
            inner: DistributionSpec::point_mass(location),
        }
    }

    #[staticmethod]
    fn rademacher() -> Self {
        PySpec {
            inner: DistributionSpec::rademacher(),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!("DistributionSpec({})", serde_json::to_string(&self.inner).unwrap_or_default())
    }
}

#[pyclass(name = "CharFn", module = "pycfmoll", frozen)]
struct PyCharFn {
    inner: CharFn,
}

#[pymethods]
impl PyCharFn {
    #[new]
    fn new(spec: &PySpec) -> PyResult<Self> {
        make_cf(spec)
    }

    fn __call__(&self, t: Vec<f64>) -> PyResult<Complex64> {
        self.inner.try_eval(&t).py()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// "yes", "no" or "unknown".
    #[getter]
    fn integrable(&self) -> &'static str {
        match self.inner.integrable() {
            Integrability::Yes => "yes",
            Integrability::No => "no",
            Integrability::Unknown => "unknown",
        }
    }

    #[getter]
    fn provenance(&self) -> Option<String> {
        self.inner.provenance().map(str::to_owned)
    }

    fn __repr__(&self) -> String {
        format!("CharFn(dim={}, integrable={})", self.dim(), self.integrable())
    }
}

#[pyclass(name = "MollificationParams", module = "pycfmoll", frozen)]
struct PyParams {
    inner: MollificationParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (
        truncation_radius=None, nodes_per_axis=None, tail_tol=None, negativity_tol=None,
        allow_unknown_integrability=false, allow_high_dim=false, check_normalization=true
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        truncation_radius: Option<f64>,
        nodes_per_axis: Option<usize>,
        tail_tol: Option<f64>,
        negativity_tol: Option<f64>,
        allow_unknown_integrability: bool,
        allow_high_dim: bool,
        check_normalization: bool,
    ) -> PyResult<Self> {
        let d = MollificationParams::default();
        let inner = MollificationParams {
            truncation_radius,
            nodes_per_axis,
            tail_tol: tail_tol.unwrap_or(d.tail_tol),
            negativity_tol: negativity_tol.unwrap_or(d.negativity_tol),
            allow_unknown_integrability,
            allow_high_dim,
            check_normalization,
        };
        inner.validate().py()?;
        Ok(PyParams { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("params serialize")
    }
}

fn params(p: Option<&PyParams>) -> MollificationParams {
    p.map(|p| p.inner.clone()).unwrap_or_default()
}

#[pyclass(name = "Grid", module = "pycfmoll", frozen)]
struct PyGrid {
    inner: Grid,
}

#[pymethods]
impl PyGrid {
    /// Parses "min:max:count[,min:max:count...]".
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyGrid {
            inner: Grid::parse(text).py()?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Lattice points in row-major order (last axis fastest).
    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points().collect()
    }
}

#[pyclass(name = "DensityField", module = "pycfmoll", frozen)]
struct PyField {
    inner: DensityField,
}

#[pymethods]
impl PyField {
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    #[getter]
    fn normalized(&self) -> bool {
        self.inner.normalized
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid {
            inner: self.inner.grid.clone(),
        }
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.grid.points().collect()
    }

    fn riemann_sum(&self) -> f64 {
        self.inner.riemann_sum()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    fn __len__(&self) -> usize {
        self.inner.values.len()
    }
}

#[pyclass(name = "ConvergenceReport", module = "pycfmoll", frozen)]
struct PyReport {
    inner: ConvergenceReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn cf_sup_error(&self) -> Vec<f64> {
        self.inner.cf_sup_error.clone()
    }

    /// Indexed by [n][k].
    #[getter]
    fn l1_mollified(&self) -> Vec<Vec<f64>> {
        self.inner.l1_mollified.clone()
    }

    #[getter]
    fn smoothing_remainder(&self) -> Vec<f64> {
        self.inner.smoothing_remainder.clone()
    }

    #[getter]
    fn sigma_schedule(&self) -> Vec<f64> {
        self.inner.sigma_schedule.clone()
    }

    #[getter]
    fn monotone_flags(&self) -> Vec<bool> {
        self.inner.monotone_flags.clone()
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }
}

#[pyfunction]
fn make_cf(spec: &PySpec) -> PyResult<PyCharFn> {
    Ok(PyCharFn {
        inner: cfmoll::make_cf(&spec.inner).py()?,
    })
}

#[pyfunction]
fn convolve(a: &PyCharFn, b: &PyCharFn) -> PyResult<PyCharFn> {
    Ok(PyCharFn {
        inner: cfmoll::convolve(&a.inner, &b.inner).py()?,
    })
}

#[pyfunction]
fn gaussian_mollify_cf(cf: &PyCharFn, sigma: f64) -> PyResult<PyCharFn> {
    Ok(PyCharFn {
        inner: cfmoll::gaussian_mollify_cf(&cf.inner, sigma).py()?,
    })
}

#[pyfunction]
fn truncation_radius(sigma: f64, tail_tol: f64, d: usize) -> PyResult<f64> {
    cfmoll::truncation_radius(sigma, tail_tol, d).py()
}

#[pyfunction]
#[pyo3(signature = (cf, sigma, z, params=None))]
fn mollified_density_at(py: Python<'_>, cf: &PyCharFn, sigma: f64, z: Vec<f64>, params: Option<&PyParams>) -> PyResult<f64> {
    let p = self::params(params);
    py.detach(|| cfmoll::mollified_density_at(&cf.inner, sigma, &z, &p)).py()
}

#[pyfunction]
#[pyo3(signature = (cf, sigma, grid, params=None))]
fn mollified_density_grid(
    py: Python<'_>,
    cf: &PyCharFn,
    sigma: f64,
    grid: &PyGrid,
    params: Option<&PyParams>,
) -> PyResult<PyField> {
    let p = self::params(params);
    let inner = py
        .detach(|| cfmoll::mollified_density_grid(&cf.inner, sigma, &grid.inner, &p))
        .py()?;
    Ok(PyField { inner })
}

#[pyfunction]
#[pyo3(signature = (cf, z, params=None))]
fn invert_density_at(py: Python<'_>, cf: &PyCharFn, z: Vec<f64>, params: Option<&PyParams>) -> PyResult<f64> {
    let p = self::params(params);
    py.detach(|| cfmoll::invert_density_at(&cf.inner, &z, &p)).py()
}

#[pyfunction]
#[pyo3(signature = (cf, grid, params=None))]
fn invert_density_grid(py: Python<'_>, cf: &PyCharFn, grid: &PyGrid, params: Option<&PyParams>) -> PyResult<PyField> {
    let p = self::params(params);
    let inner = py.detach(|| cfmoll::invert_density_grid(&cf.inner, &grid.inner, &p)).py()?;
    Ok(PyField { inner })
}

#[pyfunction]
#[pyo3(signature = (cf, params=None))]
fn cf_l1_bound(py: Python<'_>, cf: &PyCharFn, params: Option<&PyParams>) -> PyResult<f64> {
    let p = self::params(params);
    py.detach(|| cfmoll::cf_l1_bound(&cf.inner, &p)).py()
}

#[pyfunction]
fn l1_distance(a: &PyField, b: &PyField) -> PyResult<f64> {
    cfmoll::l1_distance(&a.inner, &b.inner).py()
}

#[pyfunction]
fn tv_distance(a: &PyField, b: &PyField) -> PyResult<f64> {
    cfmoll::tv_distance(&a.inner, &b.inner).py()
}

#[pyfunction]
fn mass_in_box(field: &PyField, radius: f64) -> PyResult<f64> {
    cfmoll::mass_in_box(&field.inner, radius).py()
}

#[pyfunction]
#[pyo3(signature = (cf_n, cf_target, probes=None))]
fn cf_sup_error(cf_n: &PyCharFn, cf_target: &PyCharFn, probes: Option<Vec<Vec<f64>>>) -> PyResult<f64> {
    let probes = probes.unwrap_or_else(|| cfmoll::converge::default_probes(cf_target.inner.dim()));
    cfmoll::cf_sup_error(&cf_n.inner, &cf_target.inner, &probes).py()
}

#[pyfunction]
fn gaussian_tail_prob(k: u64, epsilon: f64, d: usize) -> PyResult<f64> {
    cfmoll::gaussian_tail_prob(k, epsilon, d).py()
}

/// σ_k = 1/k unless `sigma_schedule` is given.
#[pyfunction]
#[pyo3(signature = (seq, target, k_schedule, grid, epsilon, params=None, sigma_schedule=None))]
#[allow(clippy::too_many_arguments)]
fn convergence_certificate(
    py: Python<'_>,
    seq: Vec<PyRef<'_, PyCharFn>>,
    target: &PyCharFn,
    k_schedule: Vec<u64>,
    grid: &PyGrid,
    epsilon: f64,
    params: Option<&PyParams>,
    sigma_schedule: Option<Vec<f64>>,
) -> PyResult<PyReport> {
    let p = self::params(params);
    let seq: Vec<CharFn> = seq.iter().map(|c| c.inner.clone()).collect();
    let sigmas = sigma_schedule.unwrap_or_else(|| k_schedule.iter().map(|&k| 1.0 / k as f64).collect());
    let probes = cfmoll::converge::default_probes(target.inner.dim());
    let inner = py
        .detach(|| convergence_certificate_with(&seq, &target.inner, &k_schedule, &sigmas, &grid.inner, epsilon, &p, &probes))
        .py()?;
    Ok(PyReport { inner })
}

/// `n` draws as a list of points.
#[pyfunction]
fn sample(py: Python<'_>, spec: &PySpec, n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    Ok(py.detach(|| cfmoll::sample(&spec.inner, n, seed)).py()?.points)
}

#[pyfunction]
fn empirical_cf(py: Python<'_>, spec: &PySpec, n: usize, seed: u64, t: Vec<f64>) -> PyResult<Complex64> {
    py.detach(|| {
        let batch = cfmoll::sample(&spec.inner, n, seed)?;
        cfmoll::empirical_cf(&batch, &t)
    })
    .py()
}

#[pyfunction]
fn mc_tail_prob(py: Python<'_>, spec: &PySpec, radius: f64, n: usize, seed: u64) -> PyResult<f64> {
    py.detach(|| cfmoll::mc_tail_prob(&spec.inner, radius, n, seed)).py()
}

#[pyfunction]
fn mollified_histogram(py: Python<'_>, spec: &PySpec, sigma: f64, grid: &PyGrid, n: usize, seed: u64) -> PyResult<PyField> {
    let inner = py
        .detach(|| cfmoll::mollified_histogram(&spec.inner, sigma, &grid.inner, n, seed))
        .py()?;
    Ok(PyField { inner })
}

/// Runs the closed-form invariant suite; returns (name, passed, detail) triples.
#[pyfunction]
fn selfcheck(py: Python<'_>) -> Vec<(String, bool, String)> {
    py.detach(cfmoll::selfcheck::run)
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
fn pycfmoll(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericError", m.py().get_type::<NumericError>())?;
    m.add_class::<PySpec>()?;
    m.add_class::<PyCharFn>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(make_cf, m)?)?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_mollify_cf, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_radius, m)?)?;
    m.add_function(wrap_pyfunction!(mollified_density_at, m)?)?;
    m.add_function(wrap_pyfunction!(mollified_density_grid, m)?)?;
    m.add_function(wrap_pyfunction!(invert_density_at, m)?)?;
    m.add_function(wrap_pyfunction!(invert_density_grid, m)?)?;
    m.add_function(wrap_pyfunction!(cf_l1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(l1_distance, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    m.add_function(wrap_pyfunction!(mass_in_box, m)?)?;
    m.add_function(wrap_pyfunction!(cf_sup_error, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_tail_prob, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_cf, m)?)?;
    m.add_function(wrap_pyfunction!(mc_tail_prob, m)?)?;
    m.add_function(wrap_pyfunction!(mollified_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(selfcheck, m)?)?;
    Ok(())
}
