use crate::error::{Error, Result};
use crate::geom::{geodesic, normalize, Vec3};
use crate::mesh::TriMesh;
use crate::sparse::EnvelopeCholesky;
use crate::spectrum::assemble_stiffness;

/// Discrete harmonic cutoff around `center`: 0 within geodesic radius `r1`,
/// 1 beyond `r2`, and solving `(K psi)_v = 0` at every vertex in between.
pub fn cutoff_profile(mesh: &TriMesh, center: Vec3, r1: f64, r2: f64) -> Result<Vec<f64>> {
    if !(r1 > 0.0 && r1 < r2 && r2 < std::f64::consts::PI) {
        return Err(Error::Geometry(format!("cutoff radii must satisfy 0 < r1 < r2 < pi, got {r1}, {r2}")));
    }
    let c = normalize(center);
    let dist: Vec<f64> = mesh.vertices().iter().map(|&p| geodesic(c, p)).collect();
    let mut psi: Vec<f64> = dist.iter().map(|&d| if d >= r2 { 1.0 } else { 0.0 }).collect();
    let free: Vec<usize> = (0..dist.len()).filter(|&v| dist[v] > r1 && dist[v] < r2).collect();
    let inner = dist.iter().filter(|&&d| d <= r1).count();
    let outer = dist.iter().filter(|&&d| d >= r2).count();
    if free.is_empty() || inner == 0 || outer == 0 {
        return Err(Error::Resolution(format!(
            "cutoff annulus [{r1}, {r2}] has {} interior, {inner} inner and {outer} outer vertices",
            free.len()
        )));
    }
    let k = assemble_stiffness(mesh)?;
    let sub = k.matrix().principal_submatrix(&free);
    let mut rhs: Vec<f64> = free
        .iter()
        .map(|&v| -k.matrix().row(v).map(|(j, w)| w * psi[j]).sum::<f64>())
        .collect();
    EnvelopeCholesky::factor(&sub)?.solve_in_place(&mut rhs);
    for (&v, x) in free.iter().zip(rhs) {
        psi[v] = x;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_icosphere;

    #[test]
    fn harmonic_in_the_annulus() {
        let mesh = build_icosphere(4).unwrap();
        let c = [0.0, 0.0, -1.0];
        let (r1, r2) = (0.4, 0.9);
        let psi = cutoff_profile(&mesh, c, r1, r2).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let kpsi = k.matrix().mul_vec(&psi);
        let mut interior = 0;
        for (v, &p) in mesh.vertices().iter().enumerate() {
            let d = geodesic(c, p);
            assert!((-1e-12..=1.0 + 1e-12).contains(&psi[v]));
            if d <= r1 {
                assert_eq!(psi[v], 0.0);
            } else if d >= r2 {
                assert_eq!(psi[v], 1.0);
            } else {
                interior += 1;
                assert!(kpsi[v].abs() <= 1e-8);
                assert!((psi[v] + (1.0 - psi[v]) - 1.0).abs() == 0.0);
            }
        }
        assert!(interior > 100);
    }

    #[test]
    fn bracketed_by_rotational_solutions() {
        // log tan(d/2) is harmonic away from the poles. The discrete boundary
        // rings are not circles, so by the maximum principle psi lies between
        // the rotational solutions for the extreme radii of each ring.
        let mesh = build_icosphere(5).unwrap();
        let c = [0.0, 0.0, -1.0];
        let (r1, r2) = (0.3, 1.2);
        let psi = cutoff_profile(&mesh, c, r1, r2).unwrap();
        let d: Vec<f64> = mesh.vertices().iter().map(|&p| geodesic(c, p)).collect();
        let free = |v: usize| d[v] > r1 && d[v] < r2;
        let ring = |inner: bool| -> (f64, f64) {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for &(i, j) in mesh.edges() {
                for (a, b) in [(i, j), (j, i)] {
                    if free(b) && !free(a) && (d[a] <= r1) == inner {
                        lo = lo.min(d[a]);
                        hi = hi.max(d[a]);
                    }
                }
            }
            (lo, hi)
        };
        let (a1, b1) = ring(true);
        let (a2, b2) = ring(false);
        let t = |x: f64| (0.5 * x).tan().ln();
        let profile = |x: f64, i: f64, o: f64| ((t(x) - t(i)) / (t(o) - t(i))).clamp(0.0, 1.0);
        for (v, &x) in d.iter().enumerate() {
            if free(v) {
                let lo = profile(x, b1, b2);
                let hi = profile(x, a1, a2);
                assert!(psi[v] >= lo - 0.01 && psi[v] <= hi + 0.01, "{} not in [{lo}, {hi}]", psi[v]);
            }
        }
    }

    #[test]
    fn empty_annulus_is_a_resolution_error() {
        let mesh = build_icosphere(1).unwrap();
        let r = cutoff_profile(&mesh, [0.0, 0.0, 1.0], 0.1, 0.11);
        assert!(matches!(r, Err(Error::Resolution(_))));
        assert!(matches!(cutoff_profile(&mesh, [0.0, 0.0, 1.0], 0.5, 0.4), Err(Error::Geometry(_))));
    }
}
