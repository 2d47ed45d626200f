//! Python bindings. Structured results come back as plain dicts and lists.

use num_complex::Complex64;
use perspec::dos::SourceVector;
use perspec::{ErrorClass, PeriodVector, PeriodicPotential, Quasimomentum};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(perspec_py, PerspecError, PyRuntimeError, "Numerical or assertion failure.");

fn err(e: perspec::Error) -> PyErr {
    let msg = format!("{}: {e}", e.kind());
    match e.class() {
        ErrorClass::Validation => PyValueError::new_err(msg),
        ErrorClass::Assertion | ErrorClass::Numerical => PerspecError::new_err(msg),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn period_vector(dims: Vec<usize>) -> PyResult<PeriodVector> {
    PeriodVector::new(dims).map_err(err)
}

fn source(entries: Vec<(Vec<i64>, Complex64)>) -> SourceVector {
    SourceVector { entries }
}

/// Real `p`-periodic potential on `Z^d`; values are stored with the last index fastest.
#[pyclass(name = "Potential", module = "perspec_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Potential {
    inner: PeriodicPotential,
}

#[pymethods]
impl Potential {
    #[new]
    fn new(period: Vec<usize>, values: Vec<f64>) -> PyResult<Self> {
        let inner = PeriodicPotential::new(period_vector(period)?, values).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn zeros(period: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: PeriodicPotential::zeros(period_vector(period)?) })
    }

    #[staticmethod]
    #[pyo3(signature = (period, seed, norm))]
    fn random(period: Vec<usize>, seed: u64, norm: f64) -> PyResult<Self> {
        Ok(Self { inner: PeriodicPotential::random(period_vector(period)?, seed, norm) })
    }

    #[staticmethod]
    fn checkerboard(d: usize, delta: f64) -> PyResult<Self> {
        Ok(Self { inner: perspec::checkerboard(d, delta).map_err(err)? })
    }

    #[staticmethod]
    fn staircase(period: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: perspec::staircase(&period_vector(period)?) })
    }

    #[getter]
    fn period(&self) -> Vec<usize> {
        self.inner.period().dims().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Potential(period={:?}, sup_norm={})", self.inner.period().dims(), self.inner.sup_norm())
    }

    /// `V̂(k)` in flat order.
    fn fourier(&self) -> Vec<Complex64> {
        perspec::fourier_forward(&self.inner).coeffs().to_vec()
    }

    fn reperiodize(&self, m: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: perspec::reperiodize(&self.inner, &period_vector(m)?).map_err(err)? })
    }

    /// Sorted eigenvalues of the fiber at `theta`; `basis` is "momentum" or "space".
    #[pyo3(signature = (theta, basis = "momentum"))]
    fn fiber_eigenvalues(&self, theta: Vec<f64>, basis: &str) -> PyResult<Vec<f64>> {
        let q = Quasimomentum::new(self.inner.period().clone(), theta).map_err(err)?;
        let m = match basis {
            "momentum" => perspec::build_momentum(&perspec::fourier_forward(&self.inner), &q),
            "space" => perspec::build_space(&self.inner, &q),
            other => return Err(PyValueError::new_err(format!("unknown basis {other:?}"))),
        }
        .map_err(err)?;
        Ok(perspec::eigensystem(&m).map_err(err)?.eigenvalues)
    }

    /// Rows `θ_1..θ_d, E_1..E_P` over the Brillouin grid.
    #[pyo3(signature = (grid = 32))]
    fn bands(&self, py: Python<'_>, grid: usize) -> PyResult<Vec<Vec<f64>>> {
        let g = perspec::BrillouinGrid::new(self.inner.period().clone(), grid).map_err(err)?;
        let bs = py.detach(|| perspec::compute_bands(&self.inner, &g)).map_err(err)?;
        Ok(bs.rows())
    }

    #[pyo3(signature = (grid = 32, refine = 12))]
    fn spectrum(&self, py: Python<'_>, grid: usize, refine: usize) -> PyResult<Py<PyAny>> {
        let sr = py.detach(|| perspec::spectrum(&self.inner, grid, refine)).map_err(err)?;
        to_py(py, &sr)
    }

    #[pyo3(signature = (energies, theta_n = 64))]
    fn ids(&self, py: Python<'_>, energies: Vec<f64>, theta_n: usize) -> PyResult<Vec<f64>> {
        Ok(py.detach(|| perspec::ids(&self.inner, &energies, theta_n)).map_err(err)?.k)
    }

    fn ids_finite_volume(&self, ell: usize, energy: f64) -> PyResult<f64> {
        perspec::ids_finite_volume(&self.inner, ell, energy).map_err(err)
    }

    #[pyo3(signature = (theta_n = 64))]
    fn moments(&self, theta_n: usize) -> PyResult<(f64, f64)> {
        perspec::moments(&self.inner, theta_n).map_err(err)
    }

    #[pyo3(signature = (z, theta_n = 64))]
    fn stieltjes(&self, z: Complex64, theta_n: usize) -> PyResult<Complex64> {
        perspec::dos_stieltjes(&self.inner, z, theta_n).map_err(err)
    }

    /// `source` is a list of `(site, amplitude)` pairs.
    #[pyo3(signature = (source, energies, eps = 1e-3, theta_n = 64))]
    fn spectral_density(
        &self,
        py: Python<'_>,
        source: Vec<(Vec<i64>, Complex64)>,
        energies: Vec<f64>,
        eps: f64,
        theta_n: usize,
    ) -> PyResult<Py<PyAny>> {
        let u = self::source(source);
        let m = py.detach(|| perspec::spectral_density(&self.inner, &u, &energies, eps, theta_n)).map_err(err)?;
        to_py(py, &m)
    }

    #[pyo3(signature = (source, energies, eps = 1e-3, theta_n = 64))]
    fn density_ratio(
        &self,
        py: Python<'_>,
        source: Vec<(Vec<i64>, Complex64)>,
        energies: Vec<f64>,
        eps: f64,
        theta_n: usize,
    ) -> PyResult<Py<PyAny>> {
        let u = self::source(source);
        let r = py.detach(|| perspec::density_ratio(&self.inner, &u, &energies, eps, theta_n)).map_err(err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (energy, samples = 8))]
    fn certify(&self, py: Python<'_>, energy: f64, samples: usize) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| perspec::certify_simplicity(&self.inner, energy, samples)).map_err(err)?;
        to_py(py, &r)
    }

    fn root_asymptotics(&self, py: Python<'_>, energy: f64, u: Complex64) -> PyResult<Py<PyAny>> {
        let r = perspec::root_asymptotics_check(&self.inner, energy, u).map_err(err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (delta, grid = 32, refine = 12))]
    fn is_interval(&self, py: Python<'_>, delta: f64, grid: usize, refine: usize) -> PyResult<bool> {
        py.detach(|| perspec::bs_interval_check(&self.inner, delta, grid, refine)).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (d, delta, grid = 32, refine = 12))]
fn verify_checkerboard_gap(py: Python<'_>, d: usize, delta: f64, grid: usize, refine: usize) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| perspec::verify_checkerboard_gap(d, delta, grid, refine)).map_err(err)?;
    to_py(py, &r)
}

/// Limit-periodic plan; `seed = None` adds nothing at each stage.
#[pyfunction]
#[pyo3(signature = (p, q, stages, seed = None, fraction = 1.0, grid = 32, refine = 12))]
fn construct_lp(
    py: Python<'_>,
    p: usize,
    q: usize,
    stages: usize,
    seed: Option<u64>,
    fraction: f64,
    grid: usize,
    refine: usize,
) -> PyResult<Py<PyAny>> {
    let plan = py
        .detach(|| match seed {
            Some(seed) => {
                let mut g = perspec::RandomGenerator { seed, fraction };
                perspec::lp_builder(p, q, stages, &mut g, grid, refine)
            }
            None => perspec::lp_builder(p, q, stages, &mut perspec::ZeroGenerator, grid, refine),
        })
        .map_err(err)?;
    to_py(py, &plan)
}

#[pyfunction]
fn band_length_bound(period: Vec<usize>) -> PyResult<f64> {
    Ok(perspec::band_length_bound(&period_vector(period)?))
}

#[pymodule]
fn perspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Potential>()?;
    m.add_function(wrap_pyfunction!(verify_checkerboard_gap, m)?)?;
    m.add_function(wrap_pyfunction!(construct_lp, m)?)?;
    m.add_function(wrap_pyfunction!(band_length_bound, m)?)?;
    m.add("PerspecError", m.py().get_type::<PerspecError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
