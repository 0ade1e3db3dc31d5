use crate::conformal::Density;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::spectrum::{cluster_detect, SpectralResult, DEFAULT_CLUSTER_TOL};

/// Gradient of `lambda_k * A` with respect to the vertex densities.
///
/// For a simple eigenvalue with eigenvector `u`, `d lambda / d rho_v = -lambda u_v^2 a_v / (u^T M u)`
/// and `d A / d rho_v = a_v`, so the gradient of the product is
/// `lambda a_v (1 - A u_v^2 / u^T M u)`. It is orthogonal to `rho` itself,
/// reflecting the scale invariance of `lambda * A`.
pub fn eigen_gradient(mesh: &TriMesh, density: &Density, result: &SpectralResult, k: usize) -> Result<Vec<f64>> {
    if k >= result.len() {
        return Err(Error::IndexOutOfRange { index: k, len: result.len() });
    }
    let cluster = cluster_detect(result, k, DEFAULT_CLUSTER_TOL);
    if cluster.len() > 1 {
        return Err(Error::Multiplicity {
            index: k,
            size: cluster.len(),
        });
    }
    let area = mesh.total_area(density)?;
    let lambda = result.eigenvalues[k];
    let u = &result.eigenvectors[k];
    let a = mesh.vertex_area();
    let norm: f64 = u.iter().zip(a).zip(density.values()).map(|((x, a), r)| x * x * a * r).sum();
    Ok(u.iter()
        .zip(a)
        .map(|(x, a)| lambda * a * (1.0 - area * x * x / norm))
        .collect())
}
