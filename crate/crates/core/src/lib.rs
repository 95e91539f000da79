//! Steady linear radiative transfer: a discrete-ordinates upwind DG solver
//! with synthetic-accelerated source iteration, and a reduced basis method
//! in the angular variable.

pub mod angular;
pub mod discretization;
pub mod error;
pub mod full_order;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod rbm;

pub use error::{Error, Result};
