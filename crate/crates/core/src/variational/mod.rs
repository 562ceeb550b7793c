//! TV-L1 and Huber fusion models and the first-order primal-dual solver.
//!
//! Heights are expected in normalized units (see
//! [`crate::raster::joint_normalize`]). The regularizer is isotropic: the
//! per-pixel Euclidean norm of the forward-difference gradient.

mod energy;
mod ops;
mod prox;
mod solver;

pub use energy::{data_term, energy, energy_huber, energy_tv_l1, huber_value, regularity_term};
pub use ops::{
    divergence, gradient, gradient_of, operator_norm_sq, VectorField, GRADIENT_NORM_SQ_BOUND,
};
pub use prox::{
    prox_data_huber, prox_data_l1, prox_dual_huber, prox_dual_tv, prox_huber_point, prox_l1_point,
};
pub use solver::{solve_primal_dual, FusionConfig, Model, SolverState, TraceEntry};
