//! Maximization of `lambda_k * A` over conformal densities.

mod gradient;
mod maximize;
mod subgradient;

pub use gradient::eigen_gradient;
pub use maximize::{
    maximize, Functional, OptimizerOptions, OptimizerState, OptimizerStatus, TrajectoryRow, MAX_K,
};
pub use subgradient::{subgradient_step, AscentDirection};
