//! Full-order solvers: transport sweeps, synthetic acceleration (S2SA and
//! slab DSA), source iteration and a coupled direct solve.

mod coupled;
mod dsa;
mod sasi;
mod sweep;

pub use coupled::{coupled_direct_solve, CoupledSystem, DEFAULT_DIRECT_CAP};
pub use dsa::{dsa_matrix, slab_derivative_matrices, to_dense, DsaCorrector};
pub use sasi::{sasi_solve, Accelerator, Corrector, FullOrderSolver, S2saCorrector, SasiConfig, SasiResult};
pub use sweep::{weighted_average, SweepWorkspace};
