//! Generalized eigenproblem `K u = lambda M(rho) u` on a triangulated sphere.

mod analysis;
mod assemble;
mod solver;

pub use analysis::{
    cluster_detect, dirichlet_eigenpairs, harmonic_map_check, normalized_eigenvalue, same_cluster,
    HarmonicMapReport,
};

pub use assemble::{assemble_mass, assemble_stiffness, MassMatrix, StiffnessMatrix};
pub use solver::{
    dense_oracle, lowest_eigenpairs, lowest_eigenpairs_with, SolveOptions, SpectralResult,
    DEFAULT_SEED, DENSE_LIMIT, MAX_COUNT,
};

/// Relative gap below which neighbouring eigenvalues form one multiplet.
pub const DEFAULT_CLUSTER_TOL: f64 = 0.01;
