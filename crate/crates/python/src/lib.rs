//! Python bindings: problems, quadratures, full-order solves, reduced models
//! and the benchmark harness.

use std::fs;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rtrb::angular::AngularQuadrature;
use rtrb::discretization::Discretization;
use rtrb::full_order::{weighted_average, Accelerator, FullOrderSolver, SasiConfig};
use rtrb::harness::{
    default_cells, export_artifacts, metrics_text, read_model, robustness_sweep, run_benchmark, write_model,
    BenchmarkConfig, ErrorMetrics, ProblemSource, QuadratureSpec, RunReport, SavedModel,
};
use rtrb::model::{Domain, ExampleId, ProblemSpec};
use rtrb::rbm::greedy_train;
use rtrb::Error;

create_exception!(pyrtrb, ConfigError, PyValueError, "Invalid problem or solver settings.");
create_exception!(pyrtrb, NotConvergedError, PyRuntimeError, "A source iteration did not converge.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NotConverged(_) => NotConvergedError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        Error::Config(_)
        | Error::UnknownExample(_)
        | Error::Parse(_)
        | Error::OutsideDomain { .. }
        | Error::TooLarge { .. }
        | Error::LengthMismatch { .. }
        | Error::TrainingExhausted => ConfigError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for rtrb::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn quadrature_spec(spec: &str) -> PyResult<QuadratureSpec> {
    spec.parse().py_err()
}

fn accelerator(name: &str) -> PyResult<Accelerator> {
    name.parse().py_err()
}

/// A transport problem: a catalog example or a parsed problem file.
#[pyclass(module = "pyrtrb", frozen)]
#[derive(Clone)]
struct Problem {
    source: ProblemSource,
    spec: ProblemSpec,
}

impl Problem {
    fn new(source: ProblemSource) -> PyResult<Self> {
        let spec = source.build().py_err()?;
        Ok(Self { source, spec })
    }

    fn discretization(&self, cells: Option<Vec<usize>>) -> PyResult<Discretization> {
        let cells = cells.unwrap_or_else(|| default_cells(&self.spec));
        Discretization::new(self.spec.clone(), &cells).py_err()
    }

    fn settings(&self) -> BenchmarkConfig {
        BenchmarkConfig::for_problem(self.source.clone(), self.spec.dimension())
    }

    fn quadrature(&self, spec: Option<&str>, fallback: QuadratureSpec) -> PyResult<AngularQuadrature> {
        let spec = spec.map(quadrature_spec).transpose()?.unwrap_or(fallback);
        if spec.dimension() != self.spec.dimension() {
            return Err(ConfigError::new_err(format!(
                "quadrature {spec} does not match a {}D problem",
                self.spec.dimension()
            )));
        }
        spec.build().py_err()
    }
}

#[pymethods]
impl Problem {
    /// Catalog problem by tag (`1d-1` ... `1d-5`, `2d-1` ... `2d-4`, `1d-robustness`).
    #[staticmethod]
    #[pyo3(signature = (tag, c=None, domain=None))]
    fn example(tag: &str, c: Option<f64>, domain: Option<Vec<f64>>) -> PyResult<Self> {
        let id: ExampleId = tag.parse().py_err()?;
        let domain = match domain.as_deref() {
            None => None,
            Some([a, b]) => Some(Domain::interval(*a, *b)),
            Some([a, b, c, d]) => Some(Domain::rectangle((*a, *b), (*c, *d))),
            Some(_) => return Err(ConfigError::new_err("domain needs 2 or 4 values")),
        };
        Self::new(ProblemSource::Example { id, c, domain })
    }

    /// Problem from the key-value text format.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        Self::new(ProblemSource::Config(text.to_string()))
    }

    #[getter]
    fn label(&self) -> String {
        self.source.label()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    #[getter]
    fn default_cells(&self) -> Vec<usize> {
        default_cells(&self.spec)
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}')", self.source.label())
    }
}

/// Directions and weights of an angular rule given as `gl:N` or `circle:N`.
#[pyclass(module = "pyrtrb", frozen)]
struct Quadrature {
    spec: QuadratureSpec,
    quad: AngularQuadrature,
}

#[pymethods]
impl Quadrature {
    #[new]
    fn py_new(spec: &str) -> PyResult<Self> {
        let spec = quadrature_spec(spec)?;
        Ok(Self {
            spec,
            quad: spec.build().py_err()?,
        })
    }

    /// `μ` in 1D, the angle `θ` in 2D.
    #[getter]
    fn directions(&self) -> Vec<f64> {
        self.quad.directions().iter().map(|d| d.value()).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.quad.weights().to_vec()
    }

    fn __len__(&self) -> usize {
        self.quad.len()
    }

    fn __repr__(&self) -> String {
        format!("Quadrature('{}')", self.spec)
    }
}

/// Result of a full-order solve. Fields are DG coefficient vectors.
#[pyclass(module = "pyrtrb", frozen, get_all)]
struct FullSolution {
    density: Vec<f64>,
    fields: Vec<Vec<f64>>,
    iterations: usize,
    converged: bool,
    diverged: bool,
    history: Vec<f64>,
}

/// Source iteration on one quadrature.
#[pyfunction]
#[pyo3(signature = (problem, quadrature=None, cells=None, error_tol=1e-8, iter_tol=5000, accelerator="s2sa"))]
fn solve_full(
    py: Python<'_>,
    problem: &Problem,
    quadrature: Option<&str>,
    cells: Option<Vec<usize>>,
    error_tol: f64,
    iter_tol: usize,
    accelerator: &str,
) -> PyResult<FullSolution> {
    let config = SasiConfig {
        error_tol,
        iter_tol,
        accelerator: self::accelerator(accelerator)?,
    };
    let quad = problem.quadrature(quadrature, problem.settings().training)?;
    let disc = problem.discretization(cells)?;
    let res = py
        .detach(|| FullOrderSolver::new(disc, config).and_then(|s| s.solve(&quad)))
        .py_err()?;
    Ok(FullSolution {
        density: res.density,
        fields: res.fields,
        iterations: res.iterations,
        converged: res.converged,
        diverged: res.diverged,
        history: res.history,
    })
}

/// Reduced fields and density on a set of directions.
#[pyclass(module = "pyrtrb", frozen, get_all)]
struct Prediction {
    directions: Vec<f64>,
    fields: Vec<Vec<f64>>,
    density: Vec<f64>,
    seconds: f64,
}

/// A trained reduced model together with the problem and mesh it belongs to.
#[pyclass(module = "pyrtrb", frozen)]
struct Model {
    saved: SavedModel,
}

#[pymethods]
impl Model {
    #[getter]
    fn dimension(&self) -> usize {
        self.saved.model.dimension()
    }

    #[getter]
    fn cells(&self) -> Vec<usize> {
        self.saved.cells.clone()
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.saved.model.samples.iter().map(|d| d.value()).collect()
    }

    /// Frozen density used by every reduced solve.
    #[getter]
    fn density(&self) -> Vec<f64> {
        self.saved.model.density.clone()
    }

    #[getter]
    fn degree(&self) -> Option<usize> {
        self.saved.model.degree
    }

    #[getter]
    fn spectral_ratios(&self) -> Vec<f64> {
        self.saved.model.spectral_ratios.clone()
    }

    #[getter]
    fn singular_values(&self) -> Vec<f64> {
        self.saved.model.basis.sigma.clone()
    }

    /// Orthonormal basis, one coefficient vector per function.
    #[getter]
    fn basis(&self) -> Vec<Vec<f64>> {
        self.saved.model.basis.columns.clone()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.saved.model.iterations()
    }

    /// Reduced solves for every direction of `quadrature`.
    fn predict(&self, py: Python<'_>, quadrature: &str) -> PyResult<Prediction> {
        let problem = Problem::new(self.saved.problem.clone())?;
        let fallback = quadrature_spec(quadrature)?;
        let quad = problem.quadrature(None, fallback)?;
        let disc = problem.discretization(Some(self.saved.cells.clone()))?;
        let model = &self.saved.model;
        let pred = py.detach(|| rtrb::rbm::predict(model, &disc, quad.directions())).py_err()?;
        if let Some((dir, reason)) = pred.failures.first() {
            return Err(PyRuntimeError::new_err(format!("reduced solve failed for {}: {reason}", dir.value())));
        }
        let fields: Vec<Vec<f64>> = pred.fields.into_iter().flatten().collect();
        Ok(Prediction {
            directions: pred.directions.iter().map(|d| d.value()).collect(),
            density: weighted_average(quad.weights(), &fields),
            fields,
            seconds: pred.seconds.iter().sum(),
        })
    }

    fn to_text(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_model(&self.saved, &mut buf).py_err()?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            saved: read_model(text).py_err()?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        fs::write(path, self.to_text()?).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Self::from_text(&text)
    }

    fn __repr__(&self) -> String {
        format!("Model('{}', dimension={})", self.saved.problem.label(), self.dimension())
    }
}

/// Greedy training of a reduced model. Unset options take the catalog defaults.
#[pyfunction]
#[pyo3(signature = (problem, training=None, cells=None, n0=None, r_tol=None, m_tol=None, error_tol=None, iter_tol=None, accelerator=None))]
#[allow(clippy::too_many_arguments)]
fn train_rb(
    py: Python<'_>,
    problem: &Problem,
    training: Option<&str>,
    cells: Option<Vec<usize>>,
    n0: Option<usize>,
    r_tol: Option<f64>,
    m_tol: Option<usize>,
    error_tol: Option<f64>,
    iter_tol: Option<usize>,
    accelerator: Option<&str>,
) -> PyResult<Model> {
    let mut cfg = problem.settings();
    apply_greedy(&mut cfg, n0, r_tol, m_tol, error_tol, iter_tol, accelerator)?;
    let quad = problem.quadrature(training, cfg.training)?;
    let disc = problem.discretization(cells)?;
    let model = py.detach(|| greedy_train(&disc, &quad, &cfg.greedy)).py_err()?;
    Ok(Model {
        saved: SavedModel {
            problem: problem.source.clone(),
            cells: disc.space().mesh().cells(),
            model,
        },
    })
}

fn apply_greedy(
    cfg: &mut BenchmarkConfig,
    n0: Option<usize>,
    r_tol: Option<f64>,
    m_tol: Option<usize>,
    error_tol: Option<f64>,
    iter_tol: Option<usize>,
    accelerator: Option<&str>,
) -> PyResult<()> {
    if let Some(n) = n0 {
        cfg.greedy.n0 = n;
    }
    if let Some(r) = r_tol {
        cfg.greedy.r_tol = r;
    }
    if let Some(m) = m_tol {
        cfg.greedy.m_tol = m;
    }
    for sasi in [&mut cfg.greedy.sasi, &mut cfg.full] {
        if let Some(t) = error_tol {
            sasi.error_tol = t;
        }
        if let Some(n) = iter_tol {
            sasi.iter_tol = n;
        }
        if let Some(a) = accelerator {
            sasi.accelerator = self::accelerator(a)?;
        }
    }
    Ok(())
}

/// Absolute and relative L² errors; relative values are `None` for a zero reference.
#[pyclass(module = "pyrtrb", frozen, get_all)]
#[derive(Clone)]
struct Metrics {
    e_f: f64,
    r_f: Option<f64>,
    e_rho: f64,
    r_rho: Option<f64>,
}

impl From<ErrorMetrics> for Metrics {
    fn from(m: ErrorMetrics) -> Self {
        Self {
            e_f: m.e_f,
            r_f: m.r_f,
            e_rho: m.e_rho,
            r_rho: m.r_rho,
        }
    }
}

#[pymethods]
impl Metrics {
    fn __repr__(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("None".to_string(), |x| format!("{x:.16e}"));
        format!(
            "Metrics(e_f={:.16e}, r_f={}, e_rho={:.16e}, r_rho={})",
            self.e_f,
            opt(self.r_f),
            self.e_rho,
            opt(self.r_rho)
        )
    }
}

#[pyclass(module = "pyrtrb", frozen)]
struct BenchmarkReport {
    report: RunReport,
}

#[pymethods]
impl BenchmarkReport {
    #[getter]
    fn succeeded(&self) -> bool {
        self.report.succeeded()
    }

    #[getter]
    fn failure(&self) -> Option<String> {
        self.report.failure.clone()
    }

    #[getter]
    fn rb_dimension(&self) -> Option<usize> {
        self.report.rb_dimension
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.report.samples.iter().map(|d| d.value()).collect()
    }

    #[getter]
    fn training_metrics(&self) -> Option<Metrics> {
        self.report.training_metrics.map(Metrics::from)
    }

    #[getter]
    fn testing_metrics(&self) -> Option<Metrics> {
        self.report.testing_metrics.map(Metrics::from)
    }

    /// Spectral ratio after every greedy iteration.
    #[getter]
    fn spectral_ratios(&self) -> Vec<f64> {
        self.report.history.iter().map(|h| h.spectral_ratio).collect()
    }

    /// `(offline + online) / full-order` wall time.
    #[getter]
    fn relative_time(&self) -> Option<f64> {
        self.report.timings.relative_time()
    }

    fn metrics_text(&self) -> String {
        metrics_text(&self.report)
    }

    /// Writes the artifacts and returns `(file, sha256)` pairs.
    fn export(&self, directory: PathBuf) -> PyResult<Vec<(String, String)>> {
        Ok(export_artifacts(&self.report, &directory).py_err()?.entries)
    }
}

/// Reference solve, greedy training and error metrics for one problem.
#[pyfunction]
#[pyo3(signature = (problem, training=None, test=None, cells=None, n0=None, r_tol=None, m_tol=None, error_tol=None, iter_tol=None, accelerator=None))]
#[allow(clippy::too_many_arguments)]
fn benchmark(
    py: Python<'_>,
    problem: &Problem,
    training: Option<&str>,
    test: Option<&str>,
    cells: Option<Vec<usize>>,
    n0: Option<usize>,
    r_tol: Option<f64>,
    m_tol: Option<usize>,
    error_tol: Option<f64>,
    iter_tol: Option<usize>,
    accelerator: Option<&str>,
) -> PyResult<BenchmarkReport> {
    let mut cfg = problem.settings();
    apply_greedy(&mut cfg, n0, r_tol, m_tol, error_tol, iter_tol, accelerator)?;
    if let Some(t) = training {
        cfg.training = quadrature_spec(t)?;
    }
    if let Some(t) = test {
        cfg.test = Some(quadrature_spec(t)?);
    }
    cfg.cells = cells;
    let report = py.detach(|| run_benchmark(&cfg)).py_err()?;
    Ok(BenchmarkReport { report })
}

type SweepTuple = (f64, Option<usize>, Option<f64>, Option<String>);

/// `(C, RB dimension, relative testing error of f, failure)` per value of `C`.
#[pyfunction]
#[pyo3(signature = (cs, r_tol=1e-8, n_train=40, n_test=32))]
fn sweep(
    py: Python<'_>,
    cs: Vec<f64>,
    r_tol: f64,
    n_train: usize,
    n_test: usize,
) -> PyResult<Vec<SweepTuple>> {
    let rows = py.detach(|| robustness_sweep(&cs, r_tol, n_train, n_test)).py_err()?;
    Ok(rows
        .into_iter()
        .map(|r| (r.c, r.rb_dimension, r.testing_metrics.and_then(|m| m.r_f), r.failure))
        .collect())
}

#[pymodule]
fn pyrtrb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Quadrature>()?;
    m.add_class::<FullSolution>()?;
    m.add_class::<Prediction>()?;
    m.add_class::<Model>()?;
    m.add_class::<Metrics>()?;
    m.add_class::<BenchmarkReport>()?;
    m.add_function(wrap_pyfunction!(solve_full, m)?)?;
    m.add_function(wrap_pyfunction!(train_rb, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add("NotConvergedError", m.py().get_type::<NotConvergedError>())?;
    Ok(())
}
