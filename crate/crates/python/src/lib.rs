//! Python bindings: point clouds, the grid-and-glue Betti computation, and the
//! global barcode used to check it.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mvph::complex::DEFAULT_BUDGET;
use mvph::engine::{self, BettiReport, EngineConfig};
use mvph::{BarcodeOptions, Error, NeighborGraph, PrimeField};

create_exception!(mvph, BudgetExceededError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } => BudgetExceededError::new_err(e.to_string()),
        Error::IndexOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A finite set of points in R^d.
#[pyclass(name = "PointCloud", frozen)]
struct PyPointCloud {
    inner: Arc<mvph::PointCloud>,
}

#[pymethods]
impl PyPointCloud {
    #[new]
    fn new(points: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = mvph::PointCloud::new(points).map_err(to_py)?;
        Ok(PyPointCloud { inner: Arc::new(inner) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn point(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(to_py(Error::IndexOutOfRange { index: i, len: self.inner.len() }));
        }
        Ok(self.inner.point(i).to_vec())
    }

    fn distance(&self, i: usize, j: usize) -> PyResult<f64> {
        self.inner.distance(i, j).map_err(to_py)
    }

    /// `(mins, R)`: per-axis minima and the largest per-axis spread.
    fn bounding_box(&self) -> (Vec<f64>, f64) {
        self.inner.bounding_box()
    }

    fn __repr__(&self) -> String {
        format!("PointCloud(n={}, d={})", self.inner.len(), self.inner.dim())
    }
}

fn cloud_arg(obj: &Bound<'_, PyAny>) -> PyResult<Arc<mvph::PointCloud>> {
    if let Ok(c) = obj.cast::<PyPointCloud>() {
        return Ok(c.get().inner.clone());
    }
    let points: Vec<Vec<f64>> = obj.extract()?;
    Ok(Arc::new(mvph::PointCloud::new(points).map_err(to_py)?))
}

#[pyclass(name = "Bar", frozen, get_all)]
struct PyBar {
    dim: usize,
    birth: f64,
    /// `None` for classes that survive past the largest scale.
    death: Option<f64>,
}

#[pymethods]
impl PyBar {
    fn __repr__(&self) -> String {
        match self.death {
            Some(d) => format!("Bar(dim={}, birth={}, death={})", self.dim, self.birth, d),
            None => format!("Bar(dim={}, birth={}, death=None)", self.dim, self.birth),
        }
    }
}

/// Result of [`compute`].
#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: BettiReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn field(&self) -> u32 {
        self.inner.field
    }

    #[getter]
    fn grid(&self) -> Vec<usize> {
        self.inner.grid.clone()
    }

    #[getter]
    fn scales(&self) -> Vec<f64> {
        self.inner.scales.iter().map(|s| s.scale).collect()
    }

    /// One list `[b0, b1, ...]` per scale.
    #[getter]
    fn betti(&self) -> Vec<Vec<usize>> {
        self.inner.scales.iter().map(|s| s.betti.clone()).collect()
    }

    #[getter]
    fn leaf_count(&self) -> usize {
        self.inner.diagnostics.leaf_count
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.diagnostics.warnings.clone()
    }

    /// `None` unless the run was verified.
    #[getter]
    fn verified(&self) -> Option<bool> {
        self.inner.verify.as_ref().map(|v| v.pass)
    }

    #[pyo3(signature = (include_timings = false))]
    fn to_json(&self, include_timings: bool) -> String {
        self.inner.to_json(include_timings)
    }

    fn __repr__(&self) -> String {
        format!("Report(grid={:?}, scales={})", self.inner.grid, self.inner.scales.len())
    }
}

/// Cells per axis for `p` workers in dimension `d`; returns `(k, eps_capped)`.
#[pyfunction]
fn choose_k(p: usize, d: usize, range: f64, epsilon: f64) -> (usize, bool) {
    let c = mvph::choose_k(p, d, range, epsilon);
    (c.k, c.eps_capped)
}

/// Betti numbers at each scale, computed on an overlapping grid and glued.
#[pyfunction]
#[pyo3(signature = (
    cloud, epsilon, *, scales = None, scale_steps = 10, max_dim = 1, field = 2,
    workers = None, grid = None, budget = DEFAULT_BUDGET, slack = 0.0, verify = false, audit = false
))]
#[allow(clippy::too_many_arguments)]
fn compute(
    py: Python<'_>,
    cloud: &Bound<'_, PyAny>,
    epsilon: f64,
    scales: Option<Vec<f64>>,
    scale_steps: usize,
    max_dim: usize,
    field: u32,
    workers: Option<usize>,
    grid: Option<Vec<usize>>,
    budget: usize,
    slack: f64,
    verify: bool,
    audit: bool,
) -> PyResult<PyReport> {
    let cloud = cloud_arg(cloud)?;
    let mut cfg = EngineConfig::new(epsilon).with_scale_steps(scale_steps);
    if let Some(s) = scales {
        cfg.scales = s;
    }
    cfg.max_dim = max_dim;
    cfg.field = field;
    if let Some(w) = workers {
        cfg.workers = w.max(1);
        cfg.parallelism = w.max(1);
    }
    cfg.grid = grid;
    cfg.budget = budget;
    cfg.slack = slack;
    cfg.audit = audit;
    let inner = py.detach(|| engine::run(cloud, cfg, verify)).map_err(to_py)?;
    Ok(PyReport { inner })
}

/// Global barcode of the Rips filtration up to `max_scale`.
#[pyfunction]
#[pyo3(signature = (cloud, max_scale, *, max_dim = 1, field = 2, budget = DEFAULT_BUDGET, clearing = false))]
fn persistence_barcode(
    py: Python<'_>,
    cloud: &Bound<'_, PyAny>,
    max_scale: f64,
    max_dim: usize,
    field: u32,
    budget: usize,
    clearing: bool,
) -> PyResult<Vec<PyBar>> {
    let cloud = cloud_arg(cloud)?;
    let field = PrimeField::new(field).map_err(to_py)?;
    let bars = py
        .detach(|| {
            let graph = NeighborGraph::build(&cloud, max_scale, 0.0);
            let all: Vec<usize> = (0..cloud.len()).collect();
            mvph::persistence_barcode(&all, &cloud, &graph, max_scale, max_dim, field, budget, BarcodeOptions {
                clearing,
            })
        })
        .map_err(to_py)?;
    Ok(bars.into_iter().map(|b| PyBar { dim: b.dim, birth: b.birth, death: b.death }).collect())
}

#[pymodule(name = "mvph")]
fn mvph_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointCloud>()?;
    m.add_class::<PyBar>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(choose_k, m)?)?;
    m.add_function(wrap_pyfunction!(compute, m)?)?;
    m.add_function(wrap_pyfunction!(persistence_barcode, m)?)?;
    m.add("BudgetExceededError", m.py().get_type::<BudgetExceededError>())?;
    Ok(())
}
