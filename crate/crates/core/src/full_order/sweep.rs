use crate::angular::Direction;
use crate::discretization::{DirectionOperator, Discretization, SmallLu};
use crate::error::{Error, Result};

/// Per-direction operators with factored diagonal blocks of `U_Ω + Σ_t`.
#[derive(Clone)]
pub struct SweepWorkspace {
    ops: Vec<DirectionOperator>,
    diag_lu: Vec<Vec<SmallLu>>,
}

impl SweepWorkspace {
    /// Operators with the problem's source and inflow data.
    pub fn new(disc: &Discretization, directions: &[Direction]) -> Result<Self> {
        let ops = directions
            .iter()
            .map(|d| disc.direction_operator(*d))
            .collect::<Result<Vec<_>>>()?;
        Self::from_operators(disc, ops)
    }

    /// Operators with zero source and zero inflow.
    pub fn homogeneous(disc: &Discretization, directions: &[Direction]) -> Result<Self> {
        let ops = directions
            .iter()
            .map(|d| disc.homogeneous_operator(*d))
            .collect::<Result<Vec<_>>>()?;
        Self::from_operators(disc, ops)
    }

    pub fn from_operators(disc: &Discretization, ops: Vec<DirectionOperator>) -> Result<Self> {
        let nb = disc.space().local_dofs();
        let mut diag_lu = Vec::with_capacity(ops.len());
        for op in &ops {
            let mut lus = Vec::with_capacity(disc.space().mesh().num_elements());
            for e in 0..disc.space().mesh().num_elements() {
                let blk: Vec<f64> = op
                    .streaming
                    .diag(e)
                    .iter()
                    .zip(disc.sigma_t().diag(e))
                    .map(|(a, b)| a + b)
                    .collect();
                let lu = SmallLu::new(&blk, nb).ok_or_else(|| {
                    Error::Singular(format!("diagonal block of element {e} for {:?}", op.direction))
                })?;
                lus.push(lu);
            }
            diag_lu.push(lus);
        }
        Ok(Self { ops, diag_lu })
    }

    /// Workspace restricted to the given directions, in that order.
    pub fn pick(&self, indices: &[usize]) -> Self {
        Self {
            ops: indices.iter().map(|&i| self.ops[i].clone()).collect(),
            diag_lu: indices.iter().map(|&i| self.diag_lu[i].clone()).collect(),
        }
    }

    /// Appends the directions of `other`.
    pub fn extend(&mut self, other: Self) {
        self.ops.extend(other.ops);
        self.diag_lu.extend(other.diag_lu);
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn operators(&self) -> &[DirectionOperator] {
        &self.ops
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.ops.iter().map(|o| o.direction).collect()
    }

    /// Solves `(U_Ω + Σ_t) f = rhs` for direction `j` by forward substitution.
    pub fn solve_direction(&self, j: usize, rhs: &[f64]) -> Vec<f64> {
        let op = &self.ops[j];
        let nb = op.streaming.block_size();
        let mut f = vec![0.0; rhs.len()];
        let mut b = vec![0.0; nb];
        for &e in &op.order {
            b.copy_from_slice(&rhs[e * nb..(e + 1) * nb]);
            for (c, blk) in op.streaming.off_diagonal(e) {
                let fc = &f[c * nb..(c + 1) * nb];
                for a in 0..nb {
                    let row = &blk[a * nb..(a + 1) * nb];
                    b[a] -= row.iter().zip(fc).map(|(x, y)| x * y).sum::<f64>();
                }
            }
            self.diag_lu[j][e].solve(&mut b);
            f[e * nb..(e + 1) * nb].copy_from_slice(&b);
        }
        f
    }

    /// One transport sweep: `f_Ω = (U_Ω + Σ_t)⁻¹ (g_Ω + Σ_s ρ)` for every direction.
    pub fn sweep(&self, disc: &Discretization, rho: &[f64]) -> Result<Vec<Vec<f64>>> {
        if rho.len() != disc.ndof() {
            return Err(Error::LengthMismatch {
                expected: disc.ndof(),
                got: rho.len(),
            });
        }
        let scatter = disc.sigma_s().mul_vec(rho);
        Ok((0..self.ops.len())
            .map(|j| {
                let rhs: Vec<f64> = self.ops[j].source.iter().zip(&scatter).map(|(g, s)| g + s).collect();
                self.solve_direction(j, &rhs)
            })
            .collect())
    }
}

/// `Σ_j w_j f_j`, coefficient-wise.
pub fn weighted_average(weights: &[f64], fields: &[Vec<f64>]) -> Vec<f64> {
    let n = fields.first().map_or(0, |f| f.len());
    let mut rho = vec![0.0; n];
    for (w, f) in weights.iter().zip(fields) {
        for (r, v) in rho.iter_mut().zip(f) {
            *r += w * v;
        }
    }
    rho
}
