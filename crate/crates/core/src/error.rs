use thiserror::Error;

/// Errors raised across the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("resource limit exceeded: {what} = {value} (max {max})")]
    ResourceLimit {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate triangles: {indices:?}")]
    DegenerateMesh { indices: Vec<usize> },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("degenerate map: {0}")]
    DegenerateMap(String),

    #[error("solver did not converge after {iterations} iterations (worst residual {worst_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("matrix is not positive definite at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },

    #[error("index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("eigenvalue {index} has multiplicity {size}; use the cluster subgradient")]
    Multiplicity { index: usize, size: usize },

    #[error("root finder did not converge (max residual {max_residual:.3e})")]
    RootFinding { max_residual: f64 },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("optimizer failed at iteration {iteration}: {source}")]
    Optimizer {
        iteration: usize,
        source: Box<Error>,
        /// Trajectory up to the failure, as CSV.
        trajectory_csv: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
