//! Conformal densities on the sphere: the round metric, Möbius and rational
//! pullbacks, bubble families and mass partitions.

mod bubbles;
mod density;
mod mobius;
mod partition;
mod rational;

pub use bubbles::{bubble_family, bubble_mesh, BubbleSpec};
pub use density::{Density, DEFAULT_RELATIVE_FLOOR};
pub use mobius::{mobius_pullback_density, uniform_density, MobiusMap, MOBIUS_DET_TOL};
pub use rational::{
    critical_points, rational_pullback_density, ChartPoint, CriticalPoint, Polynomial, RationalMap,
};
pub use partition::{
    mass_partition, sphere_weight, MassPartition, WeightCase, REGULAR_AREA_CASES, WEIGHT_RATIO_CASES,
};
