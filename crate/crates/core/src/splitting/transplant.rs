use crate::conformal::{Density, MobiusMap};
use crate::error::{Error, Result};
use crate::geom::{chart_radius, normalize, Frame, Vec3};
use crate::mesh::TriMesh;

use super::cutoff::cutoff_profile;

/// Möbius transplant of a cap onto the southern hemisphere: the cap of
/// geodesic radius `radius` around `center` is rotated to the south pole and
/// dilated in the chart so that its rim lands on the equator.
#[derive(Debug, Clone, Copy)]
pub struct CapTransplant {
    frame: Frame,
    dilation: MobiusMap,
    radius: f64,
}

impl CapTransplant {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < std::f64::consts::PI) {
            return Err(Error::Geometry(format!("cap radius {radius} must lie in (0, pi)")));
        }
        Ok(CapTransplant {
            frame: Frame::centered_at(normalize(center)),
            dilation: MobiusMap::dilation(1.0 / chart_radius(radius))?,
            radius,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.dilation.apply(self.frame.rotate(p))
    }

    /// Image of `mesh`; connectivity is unchanged, so vertex `v` of the
    /// result is the image of vertex `v`.
    pub fn mesh(&self, mesh: &TriMesh) -> Result<TriMesh> {
        mesh.map_vertices(|p| self.apply(p))
    }

    /// Density on the image whose measure is the push-forward of
    /// `values` (given per source vertex) under the transplant.
    pub fn push_forward(&self, image: &TriMesh, values: &[f64], floor: f64) -> Result<Density> {
        let back = self.dilation.inverse();
        let v = image
            .vertices()
            .iter()
            .zip(values)
            .map(|(&q, &r)| r * back.conformal_factor(q))
            .collect();
        Density::with_floor(v, floor)
    }
}

/// The two pieces of a density cut at a cap.
#[derive(Debug, Clone)]
pub struct SplitDensity {
    /// `rho * psi` on the original mesh, floored.
    pub outer: Density,
    /// Image of the original mesh under the cap transplant.
    pub inner_mesh: TriMesh,
    /// `rho * (1 - psi)` transplanted onto `inner_mesh`, floored.
    pub inner: Density,
    /// The cutoff `psi` on the original mesh.
    pub cutoff: Vec<f64>,
    pub transplant: CapTransplant,
}

/// Cuts `density` with the harmonic cutoff between geodesic radii `r` and
/// `2r` around `center`. The inner piece is transplanted so that the outer
/// rim of the cutoff becomes the equator; both pieces keep the floor of `density`.
pub fn split_density(mesh: &TriMesh, density: &Density, center: Vec3, r: f64) -> Result<SplitDensity> {
    if !(2.0 * r < std::f64::consts::PI) {
        return Err(Error::Geometry(format!(
            "cap of radius {r} is too large: the cutoff needs 2r < pi"
        )));
    }
    let psi = cutoff_profile(mesh, center, r, 2.0 * r)?;
    let rho = density.values();
    let floor = density.floor();
    let outer = Density::with_floor(rho.iter().zip(&psi).map(|(r, p)| r * p).collect(), floor)?;
    let transplant = CapTransplant::new(center, 2.0 * r)?;
    let inner_mesh = transplant.mesh(mesh)?;
    let cut: Vec<f64> = rho.iter().zip(&psi).map(|(r, p)| r * (1.0 - p)).collect();
    let inner = transplant.push_forward(&inner_mesh, &cut, floor)?;
    Ok(SplitDensity {
        outer,
        inner_mesh,
        inner,
        cutoff: psi,
        transplant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{bubble_family, bubble_mesh, mass_partition, uniform_density, BubbleSpec};
    use crate::geom::geodesic;
    use crate::mesh::build_icosphere;

    #[test]
    fn transplant_maps_the_rim_to_the_equator() {
        let c = normalize([0.2, -0.4, 0.7]);
        let t = CapTransplant::new(c, 0.8).unwrap();
        let south = t.apply(c);
        assert!((south[2] + 1.0).abs() < 1e-12);
        let mesh = build_icosphere(3).unwrap();
        for &p in mesh.vertices() {
            let q = t.apply(p);
            let d = geodesic(c, p);
            assert_eq!(q[2] < 0.0, d < 0.8, "{d}");
        }
    }

    #[test]
    fn push_forward_keeps_mass() {
        // uniform density on a fine mesh: the transplanted cap carries the cap's round area
        let mesh = build_icosphere(5).unwrap();
        let c = [1.0, 0.0, 0.0];
        let t = CapTransplant::new(c, 1.0).unwrap();
        let image = t.mesh(&mesh).unwrap();
        let ones: Vec<f64> = mesh.vertices().iter().map(|&p| if geodesic(c, p) < 1.0 { 1.0 } else { 0.0 }).collect();
        let d = t.push_forward(&image, &ones, 1e-12).unwrap();
        let cap = 2.0 * std::f64::consts::PI * (1.0 - 1.0f64.cos());
        let got = image.total_area(&d).unwrap();
        assert!((got / cap - 1.0).abs() < 0.02, "{got} vs {cap}");
    }

    #[test]
    fn uniform_density_stays_outside() {
        let mesh = build_icosphere(4).unwrap();
        let d = uniform_density(&mesh).unwrap();
        let s = split_density(&mesh, &d, [0.0, 0.0, 1.0], 0.1).unwrap();
        let outer = mesh.total_area(&s.outer).unwrap();
        let inner = s.inner_mesh.total_area(&s.inner).unwrap();
        assert!(outer > 0.99);
        assert!((outer + inner - 1.0).abs() < 0.02);
    }

    #[test]
    fn pieces_of_a_bubble_family_carry_bubble_masses() {
        for (m, expected) in [(2, 0.5), (3, 1.0 / 3.0)] {
            let spec = BubbleSpec::symmetric(m, 0.02).unwrap();
            let mesh = bubble_mesh(4, &spec).unwrap();
            let d = bubble_family(&mesh, &spec).unwrap();
            let s = split_density(&mesh, &d, spec.centers()[0], 0.5 * spec.cap_radius()).unwrap();
            let inner = s.inner_mesh.total_area(&s.inner).unwrap();
            assert!((inner - expected).abs() < 0.02 * expected, "m={m} inner {inner}");
            let rest = mass_partition(&mesh, &s.outer, &spec.centers()[1..], spec.cap_radius()).unwrap();
            let outer = mesh.total_area(&s.outer).unwrap();
            assert!((outer - (1.0 - expected)).abs() < 0.02 * (1.0 - expected), "m={m} outer {outer}");
            for f in rest.fractions {
                assert!((f * outer - expected).abs() < 0.02 * expected);
            }
        }
    }
}
