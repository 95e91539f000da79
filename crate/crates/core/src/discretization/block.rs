/// Block-sparse square matrix with one dense `nb × nb` block row per element.
///
/// Blocks are stored row-major. `off[e]` lists couplings `(column element, block)`;
/// the diagonal block of every element is always present.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    nb: usize,
    diag: Vec<Vec<f64>>,
    off: Vec<Vec<(usize, Vec<f64>)>>,
}

impl BlockMatrix {
    pub fn zeros(num_blocks: usize, nb: usize) -> Self {
        Self {
            nb,
            diag: vec![vec![0.0; nb * nb]; num_blocks],
            off: vec![Vec::new(); num_blocks],
        }
    }

    pub fn block_size(&self) -> usize {
        self.nb
    }

    pub fn num_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.nb * self.diag.len()
    }

    pub fn diag(&self, e: usize) -> &[f64] {
        &self.diag[e]
    }

    pub fn diag_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.diag[e]
    }

    pub fn off_diagonal(&self, e: usize) -> &[(usize, Vec<f64>)] {
        &self.off[e]
    }

    /// Mutable access to the block `(row e, column c)`, created on demand.
    pub fn block_mut(&mut self, e: usize, c: usize) -> &mut [f64] {
        if e == c {
            return &mut self.diag[e];
        }
        let nb = self.nb;
        let row = &mut self.off[e];
        let pos = match row.iter().position(|(col, _)| *col == c) {
            Some(p) => p,
            None => {
                row.push((c, vec![0.0; nb * nb]));
                row.len() - 1
            }
        };
        &mut row[pos].1
    }

    /// Entry `(i, j)` in global numbering.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let nb = self.nb;
        let (e, c) = (i / nb, j / nb);
        let (a, b) = (i % nb, j % nb);
        if e == c {
            return self.diag[e][a * nb + b];
        }
        self.off[e]
            .iter()
            .find(|(col, _)| *col == c)
            .map_or(0.0, |(_, blk)| blk[a * nb + b])
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_add(x, 1.0, &mut y);
        y
    }

    /// `y += alpha · A x`.
    pub fn mul_add(&self, x: &[f64], alpha: f64, y: &mut [f64]) {
        let nb = self.nb;
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for e in 0..self.num_blocks() {
            let ye = &mut y[e * nb..(e + 1) * nb];
            gemv_acc(&self.diag[e], &x[e * nb..(e + 1) * nb], alpha, ye);
            for (c, blk) in &self.off[e] {
                gemv_acc(blk, &x[c * nb..(c + 1) * nb], alpha, ye);
            }
        }
    }

    /// `A + B` where `B` must be block diagonal.
    pub fn plus_block_diagonal(&self, other: &BlockMatrix) -> BlockMatrix {
        assert_eq!(self.nb, other.nb);
        assert_eq!(self.num_blocks(), other.num_blocks());
        debug_assert!(other.off.iter().all(|r| r.is_empty()));
        let mut out = self.clone();
        for (d, o) in out.diag.iter_mut().zip(&other.diag) {
            for (a, b) in d.iter_mut().zip(o) {
                *a += b;
            }
        }
        out
    }

    /// Whether any off-diagonal block is present.
    pub fn is_block_diagonal(&self) -> bool {
        self.off.iter().all(|r| r.is_empty())
    }

    /// Calls `f(row, col, value)` for every stored entry.
    pub fn for_each_entry(&self, mut f: impl FnMut(usize, usize, f64)) {
        let nb = self.nb;
        for e in 0..self.num_blocks() {
            let mut emit = |c: usize, blk: &[f64]| {
                for a in 0..nb {
                    for b in 0..nb {
                        f(e * nb + a, c * nb + b, blk[a * nb + b]);
                    }
                }
            };
            emit(e, &self.diag[e]);
            for (c, blk) in &self.off[e] {
                emit(*c, blk);
            }
        }
    }
}

fn gemv_acc(blk: &[f64], x: &[f64], alpha: f64, y: &mut [f64]) {
    let nb = x.len();
    for (a, ya) in y.iter_mut().enumerate() {
        let row = &blk[a * nb..(a + 1) * nb];
        let s: f64 = row.iter().zip(x).map(|(r, xv)| r * xv).sum();
        *ya += alpha * s;
    }
}

/// LU factorization of a small dense block with partial pivoting.
#[derive(Clone, Debug)]
pub struct SmallLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl SmallLu {
    /// Returns `None` if a pivot is zero or not finite.
    pub fn new(a: &[f64], n: usize) -> Option<Self> {
        let mut lu = a.to_vec();
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))?;
            let pv = lu[p * n + k];
            if !pv.is_finite() || pv.abs() <= 1e-300_f64.max(scale * 1e-15) {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pv;
                lu[i * n + k] = f;
                for j in (k + 1)..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Some(Self { n, lu, piv })
    }

    /// Solves in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let rhs: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&rhs);
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * b[j]).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| self.lu[i * n + j] * b[j]).sum();
            b[i] = (b[i] - s) / self.lu[i * n + i];
        }
    }
}
