use crate::conformal::Density;
use crate::error::Result;
use crate::geom::{normalize, Vec3};
use crate::mesh::TriMesh;
use crate::spectrum::{assemble_mass, assemble_stiffness, dirichlet_eigenpairs, SpectralResult};

use super::transplant::CapTransplant;

/// Dirichlet spectrum of a transplanted cap.
#[derive(Debug, Clone)]
pub struct CapDirichlet {
    /// Transplanted mesh with the cap rim fitted onto the equator.
    pub mesh: TriMesh,
    /// Constrained vertices: the rim and everything outside the cap.
    pub fixed: Vec<bool>,
    pub result: SpectralResult,
}

/// Transplants the cap of geodesic radius `radius` around `center` onto the
/// southern hemisphere and solves the Dirichlet problem there for the round
/// metric of the new sphere.
///
/// Vertices next to the rim are moved onto the equator first so the
/// discrete domain is the hemisphere itself rather than the union of the
/// triangles that touch it.
pub fn cap_dirichlet(mesh: &TriMesh, center: Vec3, radius: f64, count: usize, tol: f64) -> Result<CapDirichlet> {
    let t = CapTransplant::new(center, radius)?;
    let image = fit_equator(&t.mesh(mesh)?)?;
    let fixed: Vec<bool> = image.vertices().iter().map(|p| p[2] >= 0.0).collect();
    let density = Density::constant(image.num_vertices(), 1.0)?;
    let k = assemble_stiffness(&image)?;
    let m = assemble_mass(&image, &density)?;
    let result = dirichlet_eigenpairs(&k, &m, &fixed, count, tol)?;
    Ok(CapDirichlet {
        mesh: image,
        fixed,
        result,
    })
}

/// Moves, for every edge crossing the equator, its endpoint nearer to the
/// equator onto it, unless that would flatten a whole triangle into it.
fn fit_equator(mesh: &TriMesh) -> Result<TriMesh> {
    let z: Vec<f64> = mesh.vertices().iter().map(|p| p[2]).collect();
    let mut on = vec![false; z.len()];
    for &(i, j) in mesh.edges() {
        if z[i] * z[j] < 0.0 {
            let v = if z[i].abs() <= z[j].abs() { i } else { j };
            on[v] = true;
        }
    }
    for (v, x) in z.iter().enumerate() {
        if *x == 0.0 {
            on[v] = true;
        }
    }
    for t in mesh.triangles() {
        if t.iter().all(|&v| on[v]) {
            let far = *t.iter().max_by(|&&a, &&b| z[a].abs().total_cmp(&z[b].abs())).expect("three vertices");
            if z[far] != 0.0 {
                on[far] = false;
            }
        }
    }
    let verts: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .zip(&on)
        .map(|(p, &s)| if s { normalize([p[0], p[1], 0.0]) } else { *p })
        .collect();
    TriMesh::from_parts(verts, mesh.triangles().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{bubble_mesh, BubbleSpec};
    use crate::mesh::build_icosphere;

    #[test]
    fn hemisphere_ground_state_is_two() {
        let mesh = build_icosphere(4).unwrap();
        let d = cap_dirichlet(&mesh, [0.0, 0.0, -1.0], std::f64::consts::FRAC_PI_2, 4, 1e-9).unwrap();
        let l = d.result.eigenvalues[0];
        assert!((l / 2.0 - 1.0).abs() < 0.02, "{l}");
        // the next Dirichlet eigenvalue of the hemisphere is 6 (twice)
        assert!((d.result.eigenvalues[1] / 6.0 - 1.0).abs() < 0.03);
    }

    #[test]
    fn small_caps_transplant_to_the_same_problem() {
        let spec = BubbleSpec::symmetric(2, 0.05).unwrap();
        let mesh = bubble_mesh(4, &spec).unwrap();
        let d = cap_dirichlet(&mesh, spec.centers()[0], 0.3, 1, 1e-9).unwrap();
        assert!((d.result.eigenvalues[0] / 2.0 - 1.0).abs() < 0.02);
    }
}
