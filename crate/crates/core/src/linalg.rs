//! Thin wrappers over faer's dense and sparse factorizations.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

/// Sparse LU of a square matrix given by `(row, col, value)` triplets;
/// duplicate entries are summed.
pub struct SparseLu {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let trips: Vec<Triplet<usize, usize, f64>> =
            entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
            .map_err(|e| Error::Singular(format!("sparse assembly failed: {e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
        Ok(Self {
            n,
            entries: entries.to_vec(),
            lu,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn apply_lu(&self, b: &mut [f64]) {
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        for (i, v) in b.iter_mut().enumerate() {
            *v = rhs[(i, 0)];
        }
    }

    /// Solves in place with one step of iterative refinement; fails if the
    /// result is not finite.
    pub fn solve(&self, b: &mut [f64]) -> Result<()> {
        assert_eq!(b.len(), self.n);
        let rhs = b.to_vec();
        self.apply_lu(b);
        let mut r = rhs;
        for &(i, j, v) in &self.entries {
            r[i] -= v * b[j];
        }
        self.apply_lu(&mut r);
        for (x, d) in b.iter_mut().zip(&r) {
            *x += d;
        }
        if b.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Singular("sparse solve produced non-finite values".into()))
        }
    }
}

/// Dense LU with partial pivoting and a relative pivot check.
pub struct DenseLu {
    a: Mat<f64>,
    lu: PartialPivLu<f64>,
    n: usize,
}

impl DenseLu {
    pub fn new(a: &Mat<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Singular("matrix is not square".into()));
        }
        if a.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::Singular("matrix has non-finite entries".into()));
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let scale = (0..n).map(|i| u[(i, i)].abs()).fold(0.0f64, f64::max);
        let min = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if n > 0 && !(min > scale * 1e-14 && scale > 0.0) {
            return Err(Error::Singular(format!("pivot ratio {:.3e}", min / scale)));
        }
        Ok(Self { a: a.clone(), lu, n })
    }

    /// Solves with one step of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let mut x = self.lu.solve(&rhs);
        let r = &rhs - &self.a * &x;
        x += self.lu.solve(&r);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve_mat(&self, b: &Mat<f64>) -> Mat<f64> {
        self.lu.solve(b)
    }
}

/// Thin SVD `A = U diag(s) Vᵀ` with singular values in non-increasing order.
pub fn thin_svd(a: &Mat<f64>) -> Result<(Mat<f64>, Vec<f64>, Mat<f64>)> {
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Singular(format!("SVD did not converge: {e:?}")))?;
    let s: Vec<f64> = (0..a.nrows().min(a.ncols())).map(|i| svd.S()[i]).collect();
    Ok((svd.U().to_owned(), s, svd.V().to_owned()))
}
