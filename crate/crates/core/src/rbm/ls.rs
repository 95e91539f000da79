use std::f64::consts::PI;

use faer::Mat;

use crate::angular::{gauss_legendre, Direction};
use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::poly::legendre_values;

/// Size of the fixed quadrature used to average the fitted distribution.
pub const FIXED_QUADRATURE_SIZE: usize = 64;
/// Relative singular value below which the design matrix is rank deficient.
const RANK_TOL: f64 = 1e-12;

/// Least-squares density reconstruction from an unstructured sample set.
///
/// Per dof, the sample values are fitted by a Legendre polynomial of degree
/// `s` in `v` (slab) or a trigonometric polynomial `{1, cos kθ (k ≤ s),
/// sin kθ (k < s)}` (plane), and the fit is averaged with a fixed 64-point
/// rule. The composition is one linear functional, stored as `weights`.
#[derive(Clone, Debug)]
pub struct LsReconstructor {
    samples: Vec<Direction>,
    degree: usize,
    dimension: usize,
    /// Maps sample values to fit coefficients (`A⁺`, unknowns × samples).
    pseudo_inverse: Mat<f64>,
    weights: Vec<f64>,
}

impl LsReconstructor {
    pub fn new(samples: &[Direction], degree: usize, dimension: usize) -> Result<Self> {
        if !(dimension == 1 || dimension == 2) {
            return Err(Error::Config(format!("unsupported dimension {dimension}")));
        }
        if samples.iter().any(|d| d.dimension() != dimension) {
            return Err(Error::Config("sample dimension does not match".into()));
        }
        if dimension == 2 && degree == 0 {
            return Err(Error::Config("trigonometric fits need degree at least 1".into()));
        }
        let p = unknowns(degree, dimension);
        if p > samples.len() {
            return Err(Error::RankDeficient(format!(
                "{p} unknowns but only {} samples",
                samples.len()
            )));
        }
        let a = Mat::<f64>::from_fn(samples.len(), p, |i, k| basis_value(samples[i], degree, k));
        let (u, s, v) = thin_svd(&a)?;
        if !(s[p - 1] > RANK_TOL * s[0]) {
            return Err(Error::RankDeficient(format!(
                "singular value ratio {:.3e}",
                s[p - 1] / s[0]
            )));
        }
        // A⁺ = V Σ⁻¹ Uᵀ.
        let pseudo_inverse = Mat::<f64>::from_fn(p, samples.len(), |k, i| {
            (0..p).map(|l| v[(k, l)] * u[(i, l)] / s[l]).sum()
        });
        let q = fixed_moments(degree, dimension);
        let weights = (0..samples.len())
            .map(|i| (0..p).map(|k| q[k] * pseudo_inverse[(k, i)]).sum())
            .collect();
        Ok(Self {
            samples: samples.to_vec(),
            degree,
            dimension,
            pseudo_inverse,
            weights,
        })
    }

    pub fn samples(&self) -> &[Direction] {
        &self.samples
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Averaging weights: `ρ = Σ_j c_j f(Ω_j)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Least-squares fit coefficients for one set of sample values.
    pub fn fit(&self, values: &[f64]) -> Vec<f64> {
        (0..self.pseudo_inverse.nrows())
            .map(|k| (0..values.len()).map(|i| self.pseudo_inverse[(k, i)] * values[i]).sum())
            .collect()
    }

    /// Evaluates a fitted distribution at a direction.
    pub fn eval_fit(&self, coefficients: &[f64], dir: Direction) -> f64 {
        coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c * basis_value(dir, self.degree, k))
            .sum()
    }

    /// Density from per-sample fields.
    pub fn reconstruct(&self, fields: &[Vec<f64>]) -> Result<Vec<f64>> {
        if fields.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                expected: self.samples.len(),
                got: fields.len(),
            });
        }
        let n = fields.first().map_or(0, |f| f.len());
        if let Some(bad) = fields.iter().find(|f| f.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Ok(crate::full_order::weighted_average(&self.weights, fields))
    }
}

fn unknowns(degree: usize, dimension: usize) -> usize {
    if dimension == 1 {
        degree + 1
    } else {
        2 * degree
    }
}

/// `k`-th basis function: `P_k(v)` in 1D; `1, cos θ..cos sθ, sin θ..sin (s−1)θ` in 2D.
fn basis_value(dir: Direction, degree: usize, k: usize) -> f64 {
    match dir {
        Direction::Slab(v) => legendre_values(degree, v)[k],
        Direction::Planar(theta) => {
            if k == 0 {
                1.0
            } else if k <= degree {
                (k as f64 * theta).cos()
            } else {
                ((k - degree) as f64 * theta).sin()
            }
        }
    }
}

/// Averages of the fit basis under the fixed quadrature.
fn fixed_moments(degree: usize, dimension: usize) -> Vec<f64> {
    let p = unknowns(degree, dimension);
    let (dirs, w): (Vec<Direction>, Vec<f64>) = if dimension == 1 {
        let q = gauss_legendre(FIXED_QUADRATURE_SIZE).expect("fixed rule size is positive");
        (q.directions().to_vec(), q.weights().to_vec())
    } else {
        let n = FIXED_QUADRATURE_SIZE;
        (
            (0..n).map(|j| Direction::planar(2.0 * PI * j as f64 / n as f64)).collect(),
            vec![1.0 / n as f64; n],
        )
    };
    (0..p)
        .map(|k| dirs.iter().zip(&w).map(|(d, wj)| wj * basis_value(*d, degree, k)).sum())
        .collect()
}
