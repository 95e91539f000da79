use std::fmt;
use std::str::FromStr;

use crate::angular::s2_set;
use crate::discretization::Discretization;
use crate::error::{Error, Result};

use super::coupled::{CoupledSystem, DEFAULT_DIRECT_CAP};
use super::dsa::DsaCorrector;
use super::sweep::{weighted_average, SweepWorkspace};

/// Growth of the update norm, relative to the first one, treated as divergence.
const DIVERGENCE_FACTOR: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Accelerator {
    None,
    S2sa,
    Dsa,
}

impl fmt::Display for Accelerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Accelerator::None => "none",
            Accelerator::S2sa => "s2sa",
            Accelerator::Dsa => "dsa",
        })
    }
}

impl FromStr for Accelerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Accelerator::None),
            "s2sa" => Ok(Accelerator::S2sa),
            "dsa" => Ok(Accelerator::Dsa),
            _ => Err(Error::Config(format!("unknown accelerator `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SasiConfig {
    /// Stop once `‖ρ^k − ρ^{k−1}‖_∞ ≤ error_tol · ‖ρ^k‖_∞`.
    pub error_tol: f64,
    /// Maximum number of iterations after the initial sweep.
    pub iter_tol: usize,
    pub accelerator: Accelerator,
}

impl Default for SasiConfig {
    fn default() -> Self {
        Self {
            error_tol: 1e-8,
            iter_tol: 5000,
            accelerator: Accelerator::S2sa,
        }
    }
}

impl SasiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.error_tol > 0.0) {
            return Err(Error::Config("error_tol must be positive".into()));
        }
        if self.iter_tol < 1 {
            return Err(Error::Config("iter_tol must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SasiResult {
    /// Fields from the last transport sweep.
    pub fields: Vec<Vec<f64>>,
    pub density: Vec<f64>,
    /// Loop iterations after the initial sweep.
    pub iterations: usize,
    /// `‖ρ^k − ρ^{k−1}‖_∞` after the initial step and after each iteration.
    pub history: Vec<f64>,
    pub converged: bool,
    pub diverged: bool,
}

/// Correction step of the synthetic acceleration.
pub enum Corrector {
    None,
    S2sa(S2saCorrector),
    Dsa(DsaCorrector),
}

impl Corrector {
    pub fn new(disc: &Discretization, accelerator: Accelerator) -> Result<Self> {
        match accelerator {
            Accelerator::None => Ok(Corrector::None),
            Accelerator::S2sa => Ok(Corrector::S2sa(S2saCorrector::new(disc)?)),
            Accelerator::Dsa => {
                if disc.space().dimension() != 1 {
                    return Err(Error::Config("DSA is available for slab problems only".into()));
                }
                Ok(Corrector::Dsa(DsaCorrector::new(disc)?))
            }
        }
    }

    pub fn correct(&self, disc: &Discretization, rho_star: &[f64], rho_prev: &[f64]) -> Result<Vec<f64>> {
        match self {
            Corrector::None => Ok(vec![0.0; rho_star.len()]),
            Corrector::S2sa(c) => c.correct(disc, rho_star, rho_prev),
            Corrector::Dsa(c) => Ok(c.correct(disc, rho_star, rho_prev)),
        }
    }
}

/// Low-order kinetic correction on the S2 directions with zero inflow,
/// factored once.
pub struct S2saCorrector {
    system: CoupledSystem,
    ndir: usize,
}

impl S2saCorrector {
    pub fn new(disc: &Discretization) -> Result<Self> {
        let quad = s2_set(disc.space().dimension())?;
        let ops = quad
            .directions()
            .iter()
            .map(|d| disc.homogeneous_operator(*d))
            .collect::<Result<Vec<_>>>()?;
        let system = CoupledSystem::new(disc, &ops, quad.weights(), usize::MAX)?;
        Ok(Self {
            system,
            ndir: quad.len(),
        })
    }

    /// `ρ_c = Σ ω_d δf_d` for the correction problem with source `Σ_s (ρ* − ρ)`.
    pub fn correct(&self, disc: &Discretization, rho_star: &[f64], rho_prev: &[f64]) -> Result<Vec<f64>> {
        let diff: Vec<f64> = rho_star.iter().zip(rho_prev).map(|(a, b)| a - b).collect();
        let rhs = disc.sigma_s().mul_vec(&diff);
        let (_, rho_c) = self.system.solve(&vec![rhs; self.ndir])?;
        Ok(rho_c)
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| {
        let d = (x - y).abs();
        if d.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(d)
        }
    })
}

fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Synthetic accelerated source iteration. `weights` maps the swept fields to
/// the density, coefficient by coefficient: quadrature weights for structured
/// sets, least-squares weights otherwise.
pub fn sasi_solve(
    disc: &Discretization,
    sweep: &SweepWorkspace,
    weights: &[f64],
    corrector: &Corrector,
    rho0: &[f64],
    config: &SasiConfig,
) -> Result<SasiResult> {
    config.validate()?;
    if weights.len() != sweep.len() {
        return Err(Error::LengthMismatch {
            expected: sweep.len(),
            got: weights.len(),
        });
    }
    let step = |rho: &[f64]| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let fields = sweep.sweep(disc, rho)?;
        let rho_star = weighted_average(weights, &fields);
        let rho_c = corrector.correct(disc, &rho_star, rho)?;
        let next = rho_star.iter().zip(&rho_c).map(|(a, b)| a + b).collect();
        Ok((fields, next))
    };

    let (mut fields, mut rho) = step(rho0)?;
    let mut diff = sup_diff(&rho, rho0);
    let mut history = vec![diff];
    let mut iterations = 0;
    let mut diverged = !diff.is_finite();
    while !diverged && diff > config.error_tol * sup_norm(&rho) && iterations < config.iter_tol {
        let (f, next) = step(&rho)?;
        diff = sup_diff(&next, &rho);
        fields = f;
        rho = next;
        history.push(diff);
        iterations += 1;
        diverged = !diff.is_finite() || diff > DIVERGENCE_FACTOR * history[0].max(f64::MIN_POSITIVE);
    }
    let converged = !diverged && diff <= config.error_tol * sup_norm(&rho);
    Ok(SasiResult {
        fields,
        density: rho,
        iterations,
        history,
        converged,
        diverged,
    })
}

/// Full-order solver on a fixed discretization with a cached correction operator.
pub struct FullOrderSolver {
    disc: Discretization,
    corrector: Corrector,
    config: SasiConfig,
    direct_cap: usize,
}

impl FullOrderSolver {
    pub fn new(disc: Discretization, config: SasiConfig) -> Result<Self> {
        config.validate()?;
        let corrector = Corrector::new(&disc, config.accelerator)?;
        Ok(Self {
            disc,
            corrector,
            config,
            direct_cap: DEFAULT_DIRECT_CAP,
        })
    }

    pub fn with_direct_cap(mut self, cap: usize) -> Self {
        self.direct_cap = cap;
        self
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn config(&self) -> &SasiConfig {
        &self.config
    }

    pub fn corrector(&self) -> &Corrector {
        &self.corrector
    }

    pub fn direct_cap(&self) -> usize {
        self.direct_cap
    }

    /// SASI on a quadrature from `ρ⁰ = 0`.
    pub fn solve(&self, quad: &crate::angular::AngularQuadrature) -> Result<SasiResult> {
        let sweep = SweepWorkspace::new(&self.disc, quad.directions())?;
        let rho0 = vec![0.0; self.disc.ndof()];
        sasi_solve(&self.disc, &sweep, quad.weights(), &self.corrector, &rho0, &self.config)
    }

    /// Direct solve of the coupled system on a quadrature.
    pub fn solve_direct(&self, quad: &crate::angular::AngularQuadrature) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let ops = quad
            .directions()
            .iter()
            .map(|d| self.disc.direction_operator(*d))
            .collect::<Result<Vec<_>>>()?;
        super::coupled::coupled_direct_solve(&self.disc, &ops, quad.weights(), self.direct_cap)
    }
}
