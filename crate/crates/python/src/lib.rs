//! Python bindings for `bundlelab`.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use bundlelab::blowup::{divisor_field, gauss_linking as gauss, lift_hopf, lift_local_model};
use bundlelab::experiments::{self, ExperimentConfig};
use bundlelab::flow::{minimal_period, Integrator as CoreIntegrator, VectorField};
use bundlelab::geometry::{ChartId, ChartPoint as CorePoint};
use bundlelab::hopf::{local_model_field, HopfField, LocalModel};
use bundlelab::thurston::{self, drift_field, ThurstonParams as CoreParams};

create_exception!(pybundlelab, BundlelabError, PyException);

fn err(e: bundlelab::Error) -> PyErr {
    match e {
        bundlelab::Error::Config(m) => PyValueError::new_err(m),
        other => BundlelabError::new_err(other.to_string()),
    }
}

fn chart_id(name: &str) -> PyResult<ChartId> {
    ChartId::ALL
        .iter()
        .copied()
        .find(|c| c.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown chart '{name}'")))
}

/// A point in a named chart.
#[pyclass(name = "ChartPoint", frozen)]
struct PyChartPoint {
    inner: CorePoint,
}

#[pymethods]
impl PyChartPoint {
    #[new]
    fn new(chart: &str, coords: Vec<f64>) -> PyResult<Self> {
        let id = chart_id(chart)?;
        Ok(PyChartPoint { inner: CorePoint::checked(id, &coords).map_err(err)? })
    }

    #[getter]
    fn chart(&self) -> &'static str {
        self.inner.chart().name()
    }

    #[getter]
    fn coords(&self) -> Vec<f64> {
        self.inner.coords().to_vec()
    }

    fn distance(&self, other: &PyChartPoint) -> f64 {
        self.inner.distance(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!("ChartPoint({:?}, {:?})", self.chart(), self.inner.coords())
    }
}

/// Named vector fields: `hopf`, `local-model`, `lifted-local`, `lifted-hopf`,
/// `divisor` (all taking the Euler number `e`) and `drift` (taking `lam`).
#[pyclass(name = "Field", frozen)]
struct PyField {
    inner: Arc<dyn VectorField>,
}

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (name, e = 1, lam = 1.0))]
    fn new(name: &str, e: i64, lam: f64) -> PyResult<Self> {
        let model = || LocalModel::with_default_radius(e).map_err(err);
        let inner: Arc<dyn VectorField> = match name {
            "hopf" => Arc::new(HopfField),
            "local-model" => Arc::new(local_model_field(model()?)),
            "lifted-local" => Arc::new(lift_local_model(model()?)),
            "lifted-hopf" => Arc::new(lift_hopf()),
            "divisor" => Arc::new(divisor_field(e).map_err(err)?),
            "drift" => Arc::new(drift_field(lam).map_err(err)?),
            other => return Err(PyValueError::new_err(format!("unknown field '{other}'"))),
        };
        Ok(PyField { inner })
    }

    fn eval(&self, p: &PyChartPoint) -> PyResult<Vec<f64>> {
        let v = self.inner.eval(&p.inner).map_err(err)?;
        Ok(v[..p.inner.dim()].to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.inner.name())
    }
}

/// Adaptive Dormand-Prince integrator with chart switching.
#[pyclass(name = "Integrator", frozen)]
struct PyIntegrator {
    inner: CoreIntegrator,
}

#[pymethods]
impl PyIntegrator {
    #[new]
    #[pyo3(signature = (tol = 1e-10))]
    fn new(tol: f64) -> PyResult<Self> {
        if !(tol > 0.0) {
            return Err(PyValueError::new_err("tol must be positive"));
        }
        Ok(PyIntegrator { inner: CoreIntegrator::new(tol) })
    }

    #[getter]
    fn tol(&self) -> f64 {
        self.inner.tol
    }

    fn flow(&self, f: &PyField, p: &PyChartPoint, t: f64) -> PyResult<PyChartPoint> {
        Ok(PyChartPoint { inner: self.inner.flow(f.inner.as_ref(), &p.inner, t).map_err(err)? })
    }

    /// Samples `(t, chart, coords)` along the orbit.
    fn integrate(&self, f: &PyField, p: &PyChartPoint, t: f64) -> PyResult<Vec<(f64, String, Vec<f64>)>> {
        let tr = self.inner.integrate(f.inner.as_ref(), &p.inner, t).map_err(err)?;
        Ok(tr.samples.iter().map(|(t, q)| (*t, q.chart().name().to_string(), q.coords().to_vec())).collect())
    }

    /// `(period, closure_defect)` of the orbit through `p`.
    fn minimal_period(&self, f: &PyField, p: &PyChartPoint, guess: f64) -> PyResult<(f64, f64)> {
        let r = minimal_period(&self.inner, f.inner.as_ref(), &p.inner, guess).map_err(err)?;
        Ok((r.period, r.closure_defect))
    }
}

/// Coefficients of the Thurston family.
#[pyclass(name = "ThurstonParams", frozen)]
struct PyThurstonParams {
    inner: CoreParams,
}

#[pymethods]
impl PyThurstonParams {
    #[new]
    fn new(lam: f64, alpha1: f64, alpha2: f64) -> PyResult<Self> {
        Ok(PyThurstonParams { inner: CoreParams::new(lam, alpha1, alpha2).map_err(err)? })
    }

    #[staticmethod]
    fn profile(lam: f64) -> PyResult<Self> {
        Ok(PyThurstonParams { inner: CoreParams::profile(lam).map_err(err)? })
    }

    #[staticmethod]
    fn with_ratio(lam: f64, ratio: f64) -> PyResult<Self> {
        Ok(PyThurstonParams { inner: CoreParams::with_ratio(lam, ratio).map_err(err)? })
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn alpha1(&self) -> f64 {
        self.inner.alpha1
    }

    #[getter]
    fn alpha2(&self) -> f64 {
        self.inner.alpha2
    }

    fn dynamical_phase(&self) -> f64 {
        thurston::dynamical_phase(&self.inner)
    }

    /// `(delta, defect, k)` for one leaf.
    #[pyo3(signature = (tol = 1e-10))]
    fn closure_defect(&self, tol: f64) -> PyResult<(f64, f64, i64)> {
        let r = thurston::closure_defect(&self.inner, &CoreIntegrator::new(tol)).map_err(err)?;
        Ok((r.delta, r.defect, r.k))
    }
}

#[pyfunction]
fn geometric_phase(lam: f64) -> PyResult<f64> {
    thurston::geometric_phase(lam).map_err(err)
}

#[pyfunction]
fn heis_reduce(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let h = thurston::heis_reduce(a, b, c);
    (h.a, h.b, h.c)
}

#[pyfunction]
fn transition_degree(e: i64, n: usize) -> PyResult<i64> {
    bundlelab::blowup::transition_degree(e, n).map_err(err)
}

/// Linking number of two closed polygons in R^3.
#[pyfunction]
fn gauss_linking(a: Vec<[f64; 3]>, b: Vec<[f64; 3]>) -> PyResult<(i64, f64)> {
    let r = gauss(&a, &b).map_err(err)?;
    Ok((r.value, r.raw))
}

#[pyfunction]
fn list_experiments() -> String {
    experiments::list_experiments()
}

/// Runs an experiment; `config` is a JSON object with the CLI fields.
/// Returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (name, config = None))]
fn run_experiment(name: &str, config: Option<&str>) -> PyResult<String> {
    let mut cfg = ExperimentConfig::new(name);
    if let Some(text) = config {
        let given: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("bad config: {e}")))?;
        cfg = cfg.overridden_by(&given);
    }
    let report = experiments::run(&cfg).map_err(err)?;
    serde_json::to_string(&report).map_err(|e| BundlelabError::new_err(e.to_string()))
}

#[pymodule]
pub fn pybundlelab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BundlelabError", m.py().get_type::<BundlelabError>())?;
    m.add_class::<PyChartPoint>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyIntegrator>()?;
    m.add_class::<PyThurstonParams>()?;
    m.add_function(wrap_pyfunction!(geometric_phase, m)?)?;
    m.add_function(wrap_pyfunction!(heis_reduce, m)?)?;
    m.add_function(wrap_pyfunction!(transition_degree, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_linking, m)?)?;
    m.add_function(wrap_pyfunction!(list_experiments, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
