use faer::Mat;

use crate::discretization::{BlockMatrix, DgSpace, Discretization};
use crate::error::{Error, Result};
use crate::linalg::DenseLu;

/// Dense copy of a block matrix.
pub fn to_dense(m: &BlockMatrix) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(m.dim(), m.dim());
    m.for_each_entry(|r, c, v| out[(r, c)] += v);
    out
}

/// One-sided DG derivative matrices `(D⁺, D⁻)` on a slab mesh.
///
/// `D⁺` takes the right trace on interior faces and drops the right boundary
/// flux; `D⁻` takes the left trace and drops the left boundary flux.
pub fn slab_derivative_matrices(space: &DgSpace) -> Result<(Mat<f64>, Mat<f64>)> {
    if space.dimension() != 1 {
        return Err(Error::Config("derivative matrices are defined on slab meshes only".into()));
    }
    let n = space.local_dofs();
    let mesh = space.mesh();
    let ne = mesh.num_elements();
    let nd = space.ndof();
    let mut dp = Mat::<f64>::zeros(nd, nd);
    let mut dm = Mat::<f64>::zeros(nd, nd);
    let at = |e: usize, x: f64| space.basis(e, [x, 0.0]).0;
    for e in 0..ne {
        let el = mesh.element(e);
        for (p, w) in space.volume_points(e, space.default_points(), 1) {
            let (phi, grad) = space.basis(e, p);
            for k in 0..n {
                for l in 0..n {
                    let v = -w * grad[k][0] * phi[l];
                    dp[(e * n + k, e * n + l)] += v;
                    dm[(e * n + k, e * n + l)] += v;
                }
            }
        }
        let (xl, xr) = el.x;
        let left = at(e, xl);
        let right = at(e, xr);
        for k in 0..n {
            for l in 0..n {
                // D⁺: -u⁺ φ⁺ at every left face, boundary included.
                dp[(e * n + k, e * n + l)] -= left[l] * left[k];
                // D⁻: +u⁻ φ⁻ at every right face, boundary included.
                dm[(e * n + k, e * n + l)] += right[l] * right[k];
            }
        }
        if e + 1 < ne {
            let nb_left = at(e + 1, xr);
            for k in 0..n {
                for l in 0..n {
                    dp[(e * n + k, (e + 1) * n + l)] += nb_left[l] * right[k];
                }
            }
        }
        if e > 0 {
            let nb_right = at(e - 1, xl);
            for k in 0..n {
                for l in 0..n {
                    dm[(e * n + k, (e - 1) * n + l)] -= nb_right[l] * left[k];
                }
            }
        }
    }
    Ok((dp, dm))
}

/// Consistent DG diffusion correction for slab geometry, with the density
/// flux eliminated:
///
/// ```text
/// (Σ_a − ¼ D_jump − ⅓ D_c (Σ_t − ⅜ D_jump)⁻¹ D_c) ρ_c = Σ_s (ρ* − ρ)
/// ```
pub struct DsaCorrector {
    lu: DenseLu,
}

impl DsaCorrector {
    pub fn new(disc: &Discretization) -> Result<Self> {
        Ok(Self {
            lu: DenseLu::new(&dsa_matrix(disc)?)?,
        })
    }

    pub fn correct(&self, disc: &Discretization, rho_star: &[f64], rho_prev: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = rho_star.iter().zip(rho_prev).map(|(a, b)| a - b).collect();
        self.lu.solve(&disc.sigma_s().mul_vec(&diff))
    }
}

/// The reduced DSA matrix.
pub fn dsa_matrix(disc: &Discretization) -> Result<Mat<f64>> {
    let (dp, dm) = slab_derivative_matrices(disc.space())?;
    let dc = (&dp + &dm) * 0.5;
    let jump = &dp - &dm;
    let st = to_dense(disc.sigma_t());
    let ss = to_dense(disc.sigma_s());
    let sa = &st - &ss;
    let inner = &st - &jump * 0.375;
    let inner_lu = DenseLu::new(&inner)?;
    let schur = &dc * inner_lu.solve_mat(&dc);
    Ok(&sa - &jump * 0.25 - &schur * (1.0 / 3.0))
}
