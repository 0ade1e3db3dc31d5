use crate::conformal::Density;
use crate::error::{Error, Result};
use crate::mesh::{check_len, TriMesh};
use crate::sparse::CsrMatrix;

/// Cotangent stiffness matrix: `K_ij = -w_ij`, `K_ii = sum_j w_ij`.
///
/// Conformally invariant in two dimensions, so it does not depend on the
/// density.
#[derive(Debug, Clone)]
pub struct StiffnessMatrix(CsrMatrix);

impl StiffnessMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Discrete Dirichlet energy `u^T K u`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.0.quadratic_form(u)
    }
}

/// Lumped mass matrix `diag(rho_v a_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix(Vec<f64>);

impl MassMatrix {
    pub fn new(diagonal: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = diagonal.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Input(format!("mass entry {i} is {v}; must be positive")));
        }
        Ok(MassMatrix(diagonal))
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn trace(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.0.iter().zip(x).zip(y).map(|((m, a), b)| m * a * b).sum()
    }
}

pub fn assemble_stiffness(mesh: &TriMesh) -> Result<StiffnessMatrix> {
    let n = mesh.num_vertices();
    let mut trips = Vec::with_capacity(n + 2 * mesh.num_edges());
    let mut diag = vec![0.0; n];
    let mut bad = Vec::new();
    for (e, (&(i, j), &w)) in mesh.edges().iter().zip(mesh.cot_weights()).enumerate() {
        if !w.is_finite() {
            bad.push(e);
            continue;
        }
        trips.push((i, j, -w));
        trips.push((j, i, -w));
        diag[i] += w;
        diag[j] += w;
    }
    if !bad.is_empty() {
        let tris = mesh
            .triangles()
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                bad.iter().any(|&e| {
                    let (i, j) = mesh.edges()[e];
                    t.contains(&i) && t.contains(&j)
                })
            })
            .map(|(k, _)| k)
            .collect();
        return Err(Error::DegenerateMesh { indices: tris });
    }
    for (i, d) in diag.into_iter().enumerate() {
        trips.push((i, i, d));
    }
    Ok(StiffnessMatrix(CsrMatrix::from_triplets(n, &trips)))
}

pub fn assemble_mass(mesh: &TriMesh, density: &Density) -> Result<MassMatrix> {
    check_len(mesh, density.values())?;
    MassMatrix::new(
        density
            .values()
            .iter()
            .zip(mesh.vertex_area())
            .map(|(r, a)| r * a)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_icosphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants_are_in_the_kernel() {
        for level in 0..4 {
            let k = assemble_stiffness(&build_icosphere(level).unwrap()).unwrap();
            let r = k.matrix().mul_vec(&vec![1.0; k.dim()]);
            assert!(r.iter().all(|x| x.abs() < 1e-10));
            assert!(k.matrix().max_asymmetry() < 1e-12);
        }
    }

    #[test]
    fn icosahedron_weights_are_uniform() {
        let k = assemble_stiffness(&build_icosphere(0).unwrap()).unwrap();
        let off: Vec<f64> = (0..12).flat_map(|i| k.matrix().row(i).filter(move |&(j, _)| j != i).map(|(_, v)| v)).collect();
        assert_eq!(off.len(), 60);
        assert!(off.iter().all(|v| (v - off[0]).abs() < 1e-12 && *v < 0.0));
    }

    #[test]
    fn stiffness_is_positive_semidefinite() {
        let k = assemble_stiffness(&build_icosphere(2).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u: Vec<f64> = (0..k.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(k.energy(&u) >= 0.0);
        }
    }

    #[test]
    fn mass_is_linear_in_density() {
        let mesh = build_icosphere(2).unwrap();
        let d = Density::constant(mesh.num_vertices(), 1.0).unwrap().normalize(&mesh).unwrap();
        let m = assemble_mass(&mesh, &d).unwrap();
        assert!((m.trace() - 1.0).abs() < 1e-10);
        let m2 = assemble_mass(&mesh, &d.scaled(2.0)).unwrap();
        for (a, b) in m.diagonal().iter().zip(m2.diagonal()) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
        assert!(MassMatrix::new(vec![1.0, 0.0]).is_err());
        let short = Density::constant(5, 1.0).unwrap();
        assert!(matches!(assemble_mass(&mesh, &short), Err(Error::Dimension { .. })));
    }
}
