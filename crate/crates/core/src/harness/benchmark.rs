use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::angular::{gauss_legendre, uniform_circle, AngularQuadrature, Direction};
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::full_order::{weighted_average, FullOrderSolver, SasiConfig};
use crate::model::{build_example, parse_problem, Domain, ExampleId, ProblemSpec};
use crate::rbm::{greedy_train_with, predict, GreedyConfig, ReducedModel, ReducedProblem};

use super::metrics::{error_metrics, relative_l2, ErrorMetrics};

/// Slab mesh size used by the catalog runs.
pub const SLAB_CELL_WIDTH: f64 = 0.125;
/// Cells per axis of the planar catalog runs.
pub const PLANE_CELLS: usize = 40;

/// Where a problem comes from: a catalog tag or a configuration text.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSource {
    Example {
        id: ExampleId,
        /// Parameter of the robustness family.
        c: Option<f64>,
        /// Replaces the catalog domain.
        domain: Option<Domain>,
    },
    Config(String),
}

impl ProblemSource {
    pub fn example(id: ExampleId) -> Self {
        ProblemSource::Example { id, c: None, domain: None }
    }

    pub fn build(&self) -> Result<ProblemSpec> {
        match self {
            ProblemSource::Example { id, c, domain } => {
                let p = build_example(*id, *c)?;
                match domain {
                    Some(d) => p.with_domain(*d),
                    None => Ok(p),
                }
            }
            ProblemSource::Config(text) => parse_problem(text),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProblemSource::Example { id, c: Some(c), .. } => format!("{id}-C{c}"),
            ProblemSource::Example { id, .. } => id.to_string(),
            ProblemSource::Config(_) => "config".to_string(),
        }
    }
}

/// `Δx = 0.125` in 1D, a 40 × 40 grid in 2D.
pub fn default_cells(problem: &ProblemSpec) -> Vec<usize> {
    let d = problem.domain();
    match d.y {
        None => vec![(((d.x.1 - d.x.0) / SLAB_CELL_WIDTH).round() as usize).max(1)],
        Some(_) => vec![PLANE_CELLS, PLANE_CELLS],
    }
}

/// Angular rule by family and total number of directions, written `gl:N` or `circle:N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureSpec {
    GaussLegendre(usize),
    /// `N` equally spaced planar directions; `N` must be even.
    Circle(usize),
}

impl QuadratureSpec {
    pub fn build(&self) -> Result<AngularQuadrature> {
        match *self {
            QuadratureSpec::GaussLegendre(n) => gauss_legendre(n),
            QuadratureSpec::Circle(n) => {
                if n % 2 != 0 {
                    return Err(Error::Config(format!("circle rules need an even size, got {n}")));
                }
                uniform_circle(n / 2)
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            QuadratureSpec::GaussLegendre(_) => 1,
            QuadratureSpec::Circle(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            QuadratureSpec::GaussLegendre(n) | QuadratureSpec::Circle(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for QuadratureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureSpec::GaussLegendre(n) => write!(f, "gl:{n}"),
            QuadratureSpec::Circle(n) => write!(f, "circle:{n}"),
        }
    }
}

impl FromStr for QuadratureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad quadrature `{s}`, expected gl:N or circle:N"));
        let (family, n) = s.trim().split_once(':').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        match family.trim().to_ascii_lowercase().as_str() {
            "gl" | "gauss-legendre" => Ok(QuadratureSpec::GaussLegendre(n)),
            "circle" => Ok(QuadratureSpec::Circle(n)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkConfig {
    pub problem: ProblemSource,
    /// Cells per axis; `None` uses [`default_cells`].
    pub cells: Option<Vec<usize>>,
    pub training: QuadratureSpec,
    pub test: Option<QuadratureSpec>,
    pub greedy: GreedyConfig,
    /// Settings of the full-order reference solves.
    pub full: SasiConfig,
    /// Record the training error of `f` after every greedy iteration.
    pub track_history: bool,
}

impl BenchmarkConfig {
    pub fn new(problem: ProblemSource, training: QuadratureSpec, greedy: GreedyConfig) -> Self {
        Self {
            problem,
            cells: None,
            training,
            test: None,
            greedy,
            full: SasiConfig::default(),
            track_history: true,
        }
    }

    /// Catalog settings: 24 training and 32 test Gauss–Legendre points with
    /// `N_0 = 2` and `r_tol = 1e-4` in 1D; 32 training directions with
    /// `N_0 = 4`, `r_tol = 1e-3` in 2D (`N_0 = 8`, `r_tol = 1e-2` for Example 4).
    pub fn catalog(id: ExampleId) -> Self {
        match id {
            ExampleId::Plane(n) => {
                let (n0, r_tol) = if n == 4 { (8, 1e-2) } else { (4, 1e-3) };
                Self::new(ProblemSource::example(id), QuadratureSpec::Circle(32), GreedyConfig::new(n0, r_tol))
            }
            _ => {
                let mut cfg = Self::new(
                    ProblemSource::example(id),
                    QuadratureSpec::GaussLegendre(24),
                    GreedyConfig::new(2, 1e-4),
                );
                cfg.test = Some(QuadratureSpec::GaussLegendre(32));
                cfg
            }
        }
    }
}

impl BenchmarkConfig {
    /// [`catalog`](Self::catalog) settings for an example; a problem file
    /// gets the catalog settings of its dimension.
    pub fn for_problem(source: ProblemSource, dimension: usize) -> Self {
        let mut cfg = match &source {
            ProblemSource::Example { id, .. } => Self::catalog(*id),
            ProblemSource::Config(_) if dimension == 1 => Self::catalog(ExampleId::Slab(1)),
            ProblemSource::Config(_) => Self::catalog(ExampleId::Plane(1)),
        };
        cfg.problem = source;
        cfg
    }
}

/// One greedy iteration as seen by the benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryEntry {
    pub m: usize,
    /// Spectral ratio of the snapshots after this iteration's refresh.
    pub spectral_ratio: f64,
    /// Largest relative training error of `f` with the basis after this iteration.
    pub f_error: Option<f64>,
    pub indicator: f64,
    pub added: Vec<Direction>,
    pub degree: usize,
    pub sasi_iterations: usize,
    pub candidate_seconds: f64,
    pub refresh_seconds: f64,
}

/// Wall times in seconds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timings {
    /// One full-order solve on the training quadrature.
    pub full_order: f64,
    /// Coupled initial solve of the greedy algorithm.
    pub initial: f64,
    pub candidates: Vec<f64>,
    pub refreshes: Vec<f64>,
    /// Whole offline stage, excluding history bookkeeping.
    pub offline: f64,
    /// Reduced predictions on the test set (training set if there is none).
    pub online: f64,
}

impl Timings {
    /// `(offline + online) / full_order`.
    pub fn relative_time(&self) -> Option<f64> {
        (self.full_order > 0.0).then(|| (self.offline + self.online) / self.full_order)
    }
}

/// Data kept for export.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub discretization: Discretization,
    pub model: ReducedModel,
    /// Full-order density on the training quadrature.
    pub rho_full: Vec<f64>,
    /// Training-quadrature average of the reduced training fields.
    pub rho_predicted: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub label: String,
    pub cells: Vec<usize>,
    pub training: Option<QuadratureSpec>,
    pub test: Option<QuadratureSpec>,
    pub rb_dimension: Option<usize>,
    pub samples: Vec<Direction>,
    pub degree: Option<usize>,
    /// Spectral ratio of the initial snapshots.
    pub initial_spectral_ratio: Option<f64>,
    pub full_iterations: Option<usize>,
    pub training_metrics: Option<ErrorMetrics>,
    pub testing_metrics: Option<ErrorMetrics>,
    /// Relative L² error of the frozen density `ρ_RB`.
    pub density_rb_error: Option<f64>,
    pub history: Vec<HistoryEntry>,
    pub timings: Timings,
    /// Non-convergence of a source iteration, if any.
    pub failure: Option<String>,
    pub artifacts: Option<RunArtifacts>,
}

impl RunReport {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Full-order reference, greedy training and the error metrics of one case.
///
/// Non-convergence of any source iteration ends the run early and is
/// reported in [`RunReport::failure`]; other errors are returned.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<RunReport> {
    let problem = config.problem.build()?;
    let cells = config.cells.clone().unwrap_or_else(|| default_cells(&problem));
    let disc = Discretization::new(problem, &cells)?;
    let training = config.training.build()?;
    if config.training.dimension() != disc.space().dimension()
        || config.test.is_some_and(|t| t.dimension() != disc.space().dimension())
    {
        return Err(Error::Config("quadrature does not match the problem dimension".into()));
    }
    let mut report = RunReport {
        label: config.problem.label(),
        cells: cells.clone(),
        training: Some(config.training),
        test: config.test,
        ..RunReport::default()
    };

    let solver = FullOrderSolver::new(disc.clone(), config.full)?;
    let t = Instant::now();
    let full = solver.solve(&training)?;
    report.timings.full_order = t.elapsed().as_secs_f64();
    report.full_iterations = Some(full.iterations);
    if !full.converged {
        report.failure = Some(describe_failure("full-order source iteration", full.diverged, &full.history));
        return Ok(report);
    }

    let mut f_errors = Vec::new();
    let mut tracking = 0.0;
    let t = Instant::now();
    let trained = greedy_train_with(&disc, &training, &config.greedy, |state| {
        if !config.track_history || state.m == 0 {
            return;
        }
        let t = Instant::now();
        f_errors.push(training_f_error(&disc, state.basis, state.density, &training, &full.fields));
        tracking += t.elapsed().as_secs_f64();
    });
    report.timings.offline = t.elapsed().as_secs_f64() - tracking;
    let model = match trained {
        Ok(m) => m,
        Err(Error::NotConverged(msg)) => {
            report.failure = Some(msg);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };

    report.rb_dimension = Some(model.dimension());
    report.samples = model.samples.clone();
    report.degree = model.degree;
    report.initial_spectral_ratio = model.spectral_ratios.first().copied();
    report.timings.initial = model.initial_seconds;
    report.timings.candidates = model.history.iter().map(|s| s.candidate_seconds).collect();
    report.timings.refreshes = model.history.iter().map(|s| s.refresh_seconds).collect();
    report.history = model
        .history
        .iter()
        .enumerate()
        .map(|(k, s)| HistoryEntry {
            m: s.m,
            spectral_ratio: model.spectral_ratios[k + 1],
            f_error: f_errors.get(k).copied().flatten(),
            indicator: s.indicator,
            added: s.added.clone(),
            degree: s.degree,
            sasi_iterations: s.sasi_iterations,
            candidate_seconds: s.candidate_seconds,
            refresh_seconds: s.refresh_seconds,
        })
        .collect();

    let t = Instant::now();
    let train_pred = predict(&model, &disc, training.directions())?;
    let train_seconds = t.elapsed().as_secs_f64();
    let train_fields = predicted_fields(train_pred)?;
    let rho_predicted = weighted_average(training.weights(), &train_fields);
    let metrics = error_metrics(disc.space(), &full.fields, &full.density, &train_fields, &rho_predicted)?;
    debug_assert!(metrics.is_consistent());
    report.training_metrics = Some(metrics);
    report.density_rb_error = relative_l2(disc.space(), &model.density, &full.density)?;

    report.timings.online = train_seconds;
    if let Some(spec) = config.test {
        let test = spec.build()?;
        let reference = solver.solve(&test)?;
        if !reference.converged {
            report.failure = Some(describe_failure("full-order test solve", reference.diverged, &reference.history));
            return Ok(report);
        }
        let t = Instant::now();
        let pred = predict(&model, &disc, test.directions())?;
        report.timings.online = t.elapsed().as_secs_f64();
        let fields = predicted_fields(pred)?;
        let rho = weighted_average(test.weights(), &fields);
        let metrics = error_metrics(disc.space(), &reference.fields, &reference.density, &fields, &rho)?;
        debug_assert!(metrics.is_consistent());
        report.testing_metrics = Some(metrics);
    }

    report.artifacts = Some(RunArtifacts {
        discretization: disc,
        model,
        rho_full: full.density,
        rho_predicted,
    });
    Ok(report)
}

fn describe_failure(what: &str, diverged: bool, history: &[f64]) -> String {
    format!(
        "{what} {} after {} iterations (last update {:.3e})",
        if diverged { "diverged" } else { "did not converge" },
        history.len().saturating_sub(1),
        history.last().copied().unwrap_or(f64::NAN)
    )
}

fn predicted_fields(pred: crate::rbm::Prediction) -> Result<Vec<Vec<f64>>> {
    if let Some((dir, reason)) = pred.failures.first() {
        return Err(Error::SingularReduced {
            direction: *dir,
            reason: reason.clone(),
        });
    }
    Ok(pred.fields.into_iter().flatten().collect())
}

/// Largest relative error of the reduced training fields.
fn training_f_error(
    disc: &Discretization,
    basis: &crate::rbm::ReducedBasis,
    density: &[f64],
    training: &AngularQuadrature,
    reference: &[Vec<f64>],
) -> Option<f64> {
    let problem = ReducedProblem::new(basis, disc, density).ok()?;
    let space = disc.space();
    let mut worst = 0.0f64;
    for (dir, f_ref) in training.directions().iter().zip(reference) {
        let op = disc.direction_operator(*dir).ok()?;
        let f = basis.expand(&problem.solve(&op).ok()?);
        worst = worst.max(relative_l2(space, &f, f_ref).ok()??);
    }
    Some(worst)
}

/// One row of a robustness sweep.
#[derive(Clone, Debug, Default)]
pub struct SweepRow {
    pub c: f64,
    pub rb_dimension: Option<usize>,
    pub testing_metrics: Option<ErrorMetrics>,
    pub failure: Option<String>,
}

/// Trains one model per `C` for `σ_s = C`, `σ_t = C + 1/2` on `[0, 10]`
/// and evaluates it on a Gauss–Legendre test set. Cases run concurrently;
/// a failing case is reported in its row.
pub fn robustness_sweep(cs: &[f64], r_tol: f64, n_train: usize, n_test: usize) -> Result<Vec<SweepRow>> {
    if let Some(c) = cs.iter().find(|c| !(**c >= 0.0)) {
        return Err(Error::Config(format!("C must be non-negative, got {c}")));
    }
    let run = |c: f64| -> SweepRow {
        let mut cfg = BenchmarkConfig::new(
            ProblemSource::Example {
                id: ExampleId::SlabRobustness,
                c: Some(c),
                domain: None,
            },
            QuadratureSpec::GaussLegendre(n_train),
            GreedyConfig::new(2, r_tol),
        );
        cfg.test = Some(QuadratureSpec::GaussLegendre(n_test));
        cfg.track_history = false;
        match run_benchmark(&cfg) {
            Ok(r) => SweepRow {
                c,
                rb_dimension: r.rb_dimension,
                testing_metrics: r.testing_metrics,
                failure: r.failure,
            },
            Err(e) => SweepRow {
                c,
                failure: Some(e.to_string()),
                ..SweepRow::default()
            },
        }
    };
    Ok(std::thread::scope(|s| {
        let handles: Vec<_> = cs.iter().map(|&c| s.spawn(move || run(c))).collect();
        handles
            .into_iter()
            .zip(cs)
            .map(|(h, &c)| {
                h.join().unwrap_or_else(|_| SweepRow {
                    c,
                    failure: Some("worker panicked".into()),
                    ..SweepRow::default()
                })
            })
            .collect()
    }))
}
