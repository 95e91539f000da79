use crate::discretization::{DirectionOperator, Discretization};
use crate::error::{Error, Result};
use crate::linalg::SparseLu;

/// Default cap on `N_Ω · N_dof` for direct solves.
pub const DEFAULT_DIRECT_CAP: usize = 200_000;

/// Factored coupled system over a set of directions, written with the density
/// as an auxiliary unknown:
///
/// ```text
/// (U_d + Σ_t) f_d − Σ_s ρ = b_d,    ρ − Σ_d w_d f_d = 0.
/// ```
pub struct CoupledSystem {
    ndof: usize,
    ndir: usize,
    lu: SparseLu,
}

impl CoupledSystem {
    pub fn new(disc: &Discretization, ops: &[DirectionOperator], weights: &[f64], cap: usize) -> Result<Self> {
        let ndof = disc.ndof();
        let ndir = ops.len();
        if weights.len() != ndir {
            return Err(Error::LengthMismatch {
                expected: ndir,
                got: weights.len(),
            });
        }
        if ndir * ndof > cap {
            return Err(Error::TooLarge {
                unknowns: ndir * ndof,
                cap,
            });
        }
        let rho0 = ndir * ndof;
        let mut entries = Vec::new();
        for (d, op) in ops.iter().enumerate() {
            let off = d * ndof;
            op.streaming.for_each_entry(|r, c, v| {
                if v != 0.0 {
                    entries.push((off + r, off + c, v));
                }
            });
            disc.sigma_t().for_each_entry(|r, c, v| {
                if v != 0.0 {
                    entries.push((off + r, off + c, v));
                }
            });
            disc.sigma_s().for_each_entry(|r, c, v| {
                if v != 0.0 {
                    entries.push((off + r, rho0 + c, -v));
                }
            });
            for i in 0..ndof {
                entries.push((rho0 + i, off + i, -weights[d]));
            }
        }
        for i in 0..ndof {
            entries.push((rho0 + i, rho0 + i, 1.0));
        }
        let lu = SparseLu::from_triplets((ndir + 1) * ndof, &entries)?;
        Ok(Self { ndof, ndir, lu })
    }

    /// Solves for per-direction fields and the density given per-direction right-hand sides.
    pub fn solve(&self, rhs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        if rhs.len() != self.ndir {
            return Err(Error::LengthMismatch {
                expected: self.ndir,
                got: rhs.len(),
            });
        }
        let mut b = vec![0.0; (self.ndir + 1) * self.ndof];
        for (d, r) in rhs.iter().enumerate() {
            if r.len() != self.ndof {
                return Err(Error::LengthMismatch {
                    expected: self.ndof,
                    got: r.len(),
                });
            }
            b[d * self.ndof..(d + 1) * self.ndof].copy_from_slice(r);
        }
        self.lu.solve(&mut b)?;
        let fields = (0..self.ndir).map(|d| b[d * self.ndof..(d + 1) * self.ndof].to_vec()).collect();
        let rho = b[self.ndir * self.ndof..].to_vec();
        Ok((fields, rho))
    }
}

/// Direct solve of the full discrete-ordinates system; returns the fields and `ρ`.
pub fn coupled_direct_solve(
    disc: &Discretization,
    ops: &[DirectionOperator],
    weights: &[f64],
    cap: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let sys = CoupledSystem::new(disc, ops, weights, cap)?;
    let rhs: Vec<Vec<f64>> = ops.iter().map(|o| o.source.clone()).collect();
    sys.solve(&rhs)
}
