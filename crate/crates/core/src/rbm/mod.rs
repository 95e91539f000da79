//! Reduced basis method in the angular variable: snapshot SVD, reduced
//! Galerkin solves, the ℓ¹ indicator, least-squares density reconstruction,
//! greedy training and online prediction.

mod basis;
mod greedy;
mod ls;

pub use basis::{l1_indicator, orthonormalize, reduced_solve, ReducedBasis, ReducedProblem, SINGULAR_CUTOFF};
pub use greedy::{
    greedy_train, greedy_train_with, ls_degree, predict, GreedyConfig, GreedyState, GreedyStep, Prediction,
    ReducedModel,
};
pub use ls::{LsReconstructor, FIXED_QUADRATURE_SIZE};

#[cfg(test)]
mod tests;
