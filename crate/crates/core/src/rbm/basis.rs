use faer::Mat;

use crate::discretization::{DirectionOperator, Discretization};
use crate::error::{Error, Result};
use crate::linalg::{thin_svd, DenseLu};

/// Singular values below this fraction of the largest are discarded.
pub const SINGULAR_CUTOFF: f64 = 1e-12;

/// Truncated SVD of a snapshot matrix `F = U Λ Vᵀ`.
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    /// Orthonormal columns of `U`, each of length `N_dof`.
    pub columns: Vec<Vec<f64>>,
    /// Retained singular values, non-increasing.
    pub sigma: Vec<f64>,
    /// `V`, one row per snapshot and one column per retained value.
    pub v: Mat<f64>,
    /// `λ_min / trace(Λ)` over all singular values before truncation.
    pub spectral_ratio: f64,
}

/// Economy SVD of the snapshot columns with small singular values dropped.
pub fn orthonormalize(snapshots: &[Vec<f64>]) -> Result<ReducedBasis> {
    let m = snapshots.len();
    if m == 0 {
        return Err(Error::Config("no snapshots to orthonormalize".into()));
    }
    let n = snapshots[0].len();
    if let Some(bad) = snapshots.iter().find(|s| s.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let f = Mat::<f64>::from_fn(n, m, |i, j| snapshots[j][i]);
    let (u, s, v) = thin_svd(&f)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::Config("snapshot matrix is zero or not finite".into()));
    }
    let trace: f64 = s.iter().sum();
    let spectral_ratio = s.last().copied().unwrap_or(0.0) / trace;
    let r = s.iter().take_while(|&&x| x > SINGULAR_CUTOFF * smax).count();
    let columns = (0..r).map(|k| (0..n).map(|i| u[(i, k)]).collect()).collect();
    let v = Mat::<f64>::from_fn(m, r, |i, k| v[(i, k)]);
    Ok(ReducedBasis {
        columns,
        sigma: s[..r].to_vec(),
        v,
        spectral_ratio,
    })
}

impl ReducedBasis {
    /// Basis built from given orthonormal columns, with unit singular values
    /// and identity right factor.
    pub fn from_orthonormal(columns: Vec<Vec<f64>>) -> Self {
        let r = columns.len();
        Self {
            columns,
            sigma: vec![1.0; r],
            v: Mat::<f64>::identity(r, r),
            spectral_ratio: 1.0 / r.max(1) as f64,
        }
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn ndof(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    /// `Uᵀ x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `U c`.
    pub fn expand(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ndof()];
        for (col, ck) in self.columns.iter().zip(c) {
            for (o, v) in out.iter_mut().zip(col) {
                *o += ck * v;
            }
        }
        out
    }

    /// `‖V Λ⁻¹ c‖₁`.
    pub fn indicator(&self, c: &[f64]) -> f64 {
        l1_indicator(c, &self.sigma, &self.v)
    }
}

/// `‖V Λ⁻¹ c‖₁`: the ℓ¹ norm of `c`'s coordinates in the raw snapshot basis.
pub fn l1_indicator(c: &[f64], sigma: &[f64], v: &Mat<f64>) -> f64 {
    assert_eq!(c.len(), sigma.len());
    assert_eq!(v.ncols(), sigma.len());
    let scaled: Vec<f64> = c.iter().zip(sigma).map(|(a, s)| a / s).collect();
    (0..v.nrows())
        .map(|i| (0..v.ncols()).map(|k| v[(i, k)] * scaled[k]).sum::<f64>().abs())
        .sum()
}

/// Galerkin projection onto a fixed basis with a frozen density; caches the
/// direction-independent parts `Σ_t U` and `Uᵀ Σ_s ρ`.
pub struct ReducedProblem<'a> {
    basis: &'a ReducedBasis,
    sigma_t_u: Vec<Vec<f64>>,
    scatter_rhs: Vec<f64>,
}

impl<'a> ReducedProblem<'a> {
    pub fn new(basis: &'a ReducedBasis, disc: &Discretization, rho: &[f64]) -> Result<Self> {
        if rho.len() != disc.ndof() || basis.ndof() != disc.ndof() {
            return Err(Error::LengthMismatch {
                expected: disc.ndof(),
                got: if basis.ndof() != disc.ndof() { basis.ndof() } else { rho.len() },
            });
        }
        let sigma_t_u = basis.columns.iter().map(|c| disc.sigma_t().mul_vec(c)).collect();
        let scatter_rhs = basis.project(&disc.sigma_s().mul_vec(rho));
        Ok(Self {
            basis,
            sigma_t_u,
            scatter_rhs,
        })
    }

    pub fn basis(&self) -> &ReducedBasis {
        self.basis
    }

    /// `Uᵀ (U_Ω + Σ_t) U`.
    pub fn matrix(&self, op: &DirectionOperator) -> Mat<f64> {
        let r = self.basis.rank();
        let au: Vec<Vec<f64>> = self
            .basis
            .columns
            .iter()
            .zip(&self.sigma_t_u)
            .map(|(c, stc)| {
                let mut y = stc.clone();
                op.streaming.mul_add(c, 1.0, &mut y);
                y
            })
            .collect();
        Mat::<f64>::from_fn(r, r, |i, j| {
            self.basis.columns[i].iter().zip(&au[j]).map(|(a, b)| a * b).sum()
        })
    }

    /// Reduced coefficients `c` with `Uᵀ(U_Ω + Σ_t)U c = Uᵀ(Σ_s ρ + g_Ω)`.
    pub fn solve(&self, op: &DirectionOperator) -> Result<Vec<f64>> {
        let a = self.matrix(op);
        let b: Vec<f64> = self
            .scatter_rhs
            .iter()
            .zip(self.basis.project(&op.source))
            .map(|(x, y)| x + y)
            .collect();
        let lu = DenseLu::new(&a).map_err(|e| Error::SingularReduced {
            direction: op.direction,
            reason: e.to_string(),
        })?;
        Ok(lu.solve(&b))
    }
}

/// One-off reduced solve for a direction.
pub fn reduced_solve(
    basis: &ReducedBasis,
    disc: &Discretization,
    op: &DirectionOperator,
    rho: &[f64],
) -> Result<Vec<f64>> {
    ReducedProblem::new(basis, disc, rho)?.solve(op)
}
