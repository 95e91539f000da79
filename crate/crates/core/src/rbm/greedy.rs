use std::time::Instant;

use crate::angular::{initial_set, AngularQuadrature, Direction, SampleSet};
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::full_order::{
    coupled_direct_solve, sasi_solve, Corrector, SasiConfig, SweepWorkspace, DEFAULT_DIRECT_CAP,
};

use super::basis::{orthonormalize, ReducedBasis, ReducedProblem};
use super::ls::LsReconstructor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedyConfig {
    /// Size of the initial direction set.
    pub n0: usize,
    /// Stop once the spectral ratio falls to this value.
    pub r_tol: f64,
    /// Maximum number of greedy iterations.
    pub m_tol: usize,
    pub sasi: SasiConfig,
    /// Cap on unknowns of the initial coupled solve.
    pub direct_cap: usize,
}

impl GreedyConfig {
    pub fn new(n0: usize, r_tol: f64) -> Self {
        Self {
            n0,
            r_tol,
            m_tol: usize::MAX,
            sasi: SasiConfig::default(),
            direct_cap: DEFAULT_DIRECT_CAP,
        }
    }
}

/// LS degree used at greedy iteration `m ≥ 1`.
pub fn ls_degree(dimension: usize, m: usize) -> usize {
    if dimension == 1 {
        m + 1
    } else {
        (m + 1).min(5)
    }
}

/// Record of one greedy iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyStep {
    /// Iteration number after the update (1, 2, ...).
    pub m: usize,
    /// Spectral ratio of the snapshots the selection was based on.
    pub spectral_ratio: f64,
    /// Directions added this iteration: the argmax, then its counterpart.
    pub added: Vec<Direction>,
    /// Largest indicator value.
    pub indicator: f64,
    pub degree: usize,
    pub sasi_iterations: usize,
    pub candidate_seconds: f64,
    pub refresh_seconds: f64,
}

/// Terminal state of greedy training.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub basis: ReducedBasis,
    /// Selected directions in insertion order; snapshot `j` belongs to `samples[j]`.
    pub samples: Vec<Direction>,
    pub snapshots: Vec<Vec<f64>>,
    /// Frozen density `ρ_RB`.
    pub density: Vec<f64>,
    /// LS degree of the last refresh; `None` if no greedy step was taken.
    pub degree: Option<usize>,
    /// Spectral ratio of every SVD, starting with the initial snapshots.
    pub spectral_ratios: Vec<f64>,
    pub history: Vec<GreedyStep>,
    pub initial_seconds: f64,
}

impl ReducedModel {
    pub fn dimension(&self) -> usize {
        self.basis.rank()
    }

    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

/// Snapshot state passed to the observer at the top of every greedy pass.
pub struct GreedyState<'a> {
    pub m: usize,
    pub basis: &'a ReducedBasis,
    pub density: &'a [f64],
    pub samples: &'a [Direction],
}

/// Greedy training in the angular variable.
pub fn greedy_train(
    disc: &Discretization,
    training: &AngularQuadrature,
    config: &GreedyConfig,
) -> Result<ReducedModel> {
    greedy_train_with(disc, training, config, |_| {})
}

/// [`greedy_train`] with a callback invoked after each SVD.
pub fn greedy_train_with(
    disc: &Discretization,
    training: &AngularQuadrature,
    config: &GreedyConfig,
    mut observer: impl FnMut(&GreedyState<'_>),
) -> Result<ReducedModel> {
    config.sasi.validate()?;
    if !(config.r_tol > 0.0) {
        return Err(Error::Config("r_tol must be positive".into()));
    }
    let dim = disc.space().dimension();
    if training.dimension() != dim {
        return Err(Error::Config("training directions do not match the problem dimension".into()));
    }
    let counterparts: Vec<usize> = (0..training.len())
        .map(|i| {
            training.counterpart_index(i).ok_or_else(|| {
                Error::Config(format!(
                    "training set is not closed under the symmetric counterpart (direction {:?})",
                    training.directions()[i]
                ))
            })
        })
        .collect::<Result<_>>()?;

    let t0 = Instant::now();
    let initial = initial_set(dim, config.n0)?;
    let init_ops = initial
        .directions()
        .iter()
        .map(|d| disc.direction_operator(*d))
        .collect::<Result<Vec<_>>>()?;
    let (mut snapshots, mut rho) = coupled_direct_solve(disc, &init_ops, initial.weights(), config.direct_cap)?;
    let mut rb_sweep = SweepWorkspace::from_operators(disc, init_ops)?;
    let train_sweep = SweepWorkspace::new(disc, training.directions())?;
    let corrector = Corrector::new(disc, config.sasi.accelerator)?;
    let initial_seconds = t0.elapsed().as_secs_f64();

    let mut selected: SampleSet = initial.directions().iter().copied().collect();
    let mut samples: Vec<Direction> = initial.directions().to_vec();
    let mut spectral_ratios = Vec::new();
    let mut history = Vec::new();
    let mut degree = None;
    let mut m = 0usize;

    loop {
        let basis = orthonormalize(&snapshots)?;
        spectral_ratios.push(basis.spectral_ratio);
        observer(&GreedyState {
            m,
            basis: &basis,
            density: &rho,
            samples: &samples,
        });
        if basis.spectral_ratio <= config.r_tol || m >= config.m_tol {
            return Ok(ReducedModel {
                basis,
                samples,
                snapshots,
                density: rho,
                degree,
                spectral_ratios,
                history,
                initial_seconds,
            });
        }

        let tc = Instant::now();
        let problem = ReducedProblem::new(&basis, disc, &rho)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, op) in train_sweep.operators().iter().enumerate() {
            if selected.contains(&op.direction) {
                continue;
            }
            let c = problem.solve(op)?;
            let value = basis.indicator(&c);
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((i, value));
            }
        }
        let (i_new, indicator) = best.ok_or(Error::TrainingExhausted)?;
        let candidate_seconds = tc.elapsed().as_secs_f64();

        let tr = Instant::now();
        let mut added = Vec::new();
        for i in [i_new, counterparts[i_new]] {
            let dir = training.directions()[i];
            if selected.insert(dir) {
                added.push(dir);
                samples.push(dir);
                rb_sweep.extend(train_sweep.pick(&[i]));
            }
        }
        m += 1;
        let s = ls_degree(dim, m);
        degree = Some(s);
        let recon = LsReconstructor::new(&samples, s, dim)?;
        let result = sasi_solve(disc, &rb_sweep, recon.weights(), &corrector, &rho, &config.sasi)?;
        if !result.converged {
            return Err(Error::NotConverged(format!(
                "source iteration {} at greedy iteration {m} with {} samples {:?} after {} iterations (last update {:.3e})",
                if result.diverged { "diverged" } else { "did not converge" },
                samples.len(),
                samples.iter().map(|d| d.value()).collect::<Vec<_>>(),
                result.iterations,
                result.history.last().copied().unwrap_or(f64::NAN),
            )));
        }
        rho = recon.reconstruct(&result.fields)?;
        snapshots = result.fields;
        history.push(GreedyStep {
            m,
            spectral_ratio: basis.spectral_ratio,
            added,
            indicator,
            degree: s,
            sasi_iterations: result.iterations,
            candidate_seconds,
            refresh_seconds: tr.elapsed().as_secs_f64(),
        });
    }
}

/// Reduced predictions for a set of test directions.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub directions: Vec<Direction>,
    /// `None` where the reduced system was singular.
    pub fields: Vec<Option<Vec<f64>>>,
    /// Wall time per direction, including operator assembly.
    pub seconds: Vec<f64>,
    pub failures: Vec<(Direction, String)>,
}

/// Online stage: reduced solve against the frozen density for every direction.
pub fn predict(model: &ReducedModel, disc: &Discretization, directions: &[Direction]) -> Result<Prediction> {
    let problem = ReducedProblem::new(&model.basis, disc, &model.density)?;
    let mut out = Prediction {
        directions: directions.to_vec(),
        fields: Vec::with_capacity(directions.len()),
        seconds: Vec::with_capacity(directions.len()),
        failures: Vec::new(),
    };
    for dir in directions {
        let t = Instant::now();
        let op = disc.direction_operator(*dir)?;
        match problem.solve(&op) {
            Ok(c) => out.fields.push(Some(model.basis.expand(&c))),
            Err(e) => {
                out.fields.push(None);
                out.failures.push((*dir, e.to_string()));
            }
        }
        out.seconds.push(t.elapsed().as_secs_f64());
    }
    Ok(out)
}
