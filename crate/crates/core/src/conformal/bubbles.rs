use std::f64::consts::PI;

use super::Density;
use crate::error::{Error, Result};
use crate::geom::{self, Frame, Vec3};
use crate::mesh::{build_icosphere, grade_toward, TriMesh};

/// Target number of mesh edges across a bubble core when grading a mesh for it.
const CORE_EDGES: f64 = 72.0;
/// Largest vertex compression used by [`bubble_mesh`].
const MAX_COMPRESSION: f64 = 64.0;

/// Concentrated spheres attached at `centers`, each a Möbius-dilation profile
/// of chart scale `concentration` carrying `weights[i]` of the unit area.
/// Whatever mass the weights leave over is spread uniformly as the regular part.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleSpec {
    centers: Vec<Vec3>,
    weights: Vec<f64>,
    concentration: f64,
}

impl BubbleSpec {
    pub fn new(centers: Vec<Vec3>, weights: Vec<f64>, concentration: f64) -> Result<Self> {
        if centers.is_empty() || centers.len() != weights.len() {
            return Err(Error::Input(format!(
                "{} centers but {} weights",
                centers.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::Input(format!("bubble weight {w} must be positive")));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::Input(format!("bubble weights sum to {total} > 1")));
        }
        if !(concentration > 0.0 && concentration <= 1.0) {
            return Err(Error::Input(format!("concentration {concentration} must lie in (0, 1]")));
        }
        if centers.iter().any(|c| !(geom::norm(*c) > 0.0) || c.iter().any(|x| !x.is_finite())) {
            return Err(Error::Input("bubble centers must be nonzero finite vectors".into()));
        }
        let centers: Vec<Vec3> = centers.into_iter().map(geom::normalize).collect();
        if crate::mesh::min_separation(&centers) < 1e-9 {
            return Err(Error::Geometry("bubble centers coincide".into()));
        }
        Ok(BubbleSpec {
            centers,
            weights,
            concentration,
        })
    }

    /// `m` equal bubbles in a symmetric arrangement: a pole, two antipodal
    /// poles, an equilateral triangle on the equator, or a regular tetrahedron.
    pub fn symmetric(m: usize, concentration: f64) -> Result<Self> {
        let s = 1.0 / 3f64.sqrt();
        let centers = match m {
            1 => vec![[0.0, 0.0, -1.0]],
            2 => vec![[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]],
            3 => (0..3)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / 3.0;
                    [a.cos(), a.sin(), 0.0]
                })
                .collect(),
            4 => vec![[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]],
            _ => {
                return Err(Error::Input(format!(
                    "symmetric bubble arrangements exist for 1 to 4 bubbles, not {m}"
                )))
            }
        };
        BubbleSpec::new(centers, vec![1.0 / m as f64; m], concentration)
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Mass left to the uniform regular part.
    pub fn regular_mass(&self) -> f64 {
        (1.0 - self.weights.iter().sum::<f64>()).max(0.0)
    }

    /// Number of Dirac points in the limit measure. Without a regular part,
    /// one bubble can be taken as the base sphere after a Möbius change, so
    /// only the others are singular.
    pub fn singular_count(&self) -> usize {
        if self.regular_mass() <= 1e-9 {
            self.len() - 1
        } else {
            self.len()
        }
    }

    /// Checks the bound `K <= k - 1` on the number of bubbling points for a
    /// `lambda_k` experiment.
    pub fn check_for_k(&self, k: usize) -> Result<()> {
        let kk = self.singular_count();
        if k == 0 || kk > k - 1 {
            return Err(Error::Input(format!(
                "{kk} bubbling points exceed the bound k - 1 for k = {k}"
            )));
        }
        Ok(())
    }

    /// Smallest pairwise geodesic distance between centers (`pi` for one bubble).
    pub fn separation(&self) -> f64 {
        crate::mesh::min_separation(&self.centers)
    }

    /// Chart radius up to which each profile is kept in full; it is then
    /// tapered to zero at twice this radius, half way to the nearest neighbour.
    pub fn cap_chart_radius(&self) -> f64 {
        0.5 * geom::chart_radius(0.5 * self.separation())
    }

    /// Geodesic radius of the cap where a bubble's profile is kept in full.
    pub fn cap_radius(&self) -> f64 {
        geom::geodesic_radius(self.cap_chart_radius())
    }
}

/// Round-area Jacobian of `z -> t z` at chart radius `r`.
pub(crate) fn dilation_profile(t: f64, r: f64) -> f64 {
    let r2 = r * r;
    let s = 1.0 + r2;
    t * t * s * s / ((1.0 + t * t * r2) * (1.0 + t * t * r2))
}

fn taper(r: f64, cap: f64) -> f64 {
    let x = ((r - cap) / cap).clamp(0.0, 1.0);
    1.0 - x * x * (3.0 - 2.0 * x)
}

/// Unit-area density of the bubble family.
///
/// Bubble `i` contributes `w_i J(z) / (4 pi)`, where `J` is the Jacobian of the
/// dilation `z -> z / eps` in the chart centered at `x_i`: a round sphere of
/// area `w_i` squeezed to chart scale `eps`. The profile is kept in full up
/// to the cap chart radius `R`, tapered smoothly to zero at `2R` and the
/// floor applies beyond. The taper only removes a far neck of relative area
/// about `(eps / R)^2`.
pub fn bubble_family(mesh: &TriMesh, spec: &BubbleSpec) -> Result<Density> {
    let eps = spec.concentration;
    if spec.len() > 1 && spec.separation() < 4.0 * eps {
        return Err(Error::Geometry(format!(
            "bubble centers {:.4} apart, below 4 eps = {:.4}",
            spec.separation(),
            4.0 * eps
        )));
    }
    let cap = spec.cap_chart_radius();
    if cap <= eps {
        return Err(Error::Geometry(format!(
            "cap chart radius {cap:.4} does not exceed the concentration {eps}"
        )));
    }
    let t = 1.0 / eps;
    let frames: Vec<Frame> = spec.centers.iter().map(|&c| Frame::centered_at(c)).collect();
    let base = spec.regular_mass() / (4.0 * PI);
    let values = mesh
        .vertices()
        .iter()
        .map(|&p| {
            base + frames
                .iter()
                .zip(&spec.weights)
                .map(|(f, w)| {
                    let r = f.chart(p).norm();
                    if r < 2.0 * cap {
                        w * dilation_profile(t, r) * taper(r, cap) / (4.0 * PI)
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
        })
        .collect();
    Density::from_values(values)?.normalize(mesh)
}

/// Icosphere of the given level with vertices graded toward the bubble
/// centers so that each core of chart scale `eps` spans several edges.
pub fn bubble_mesh(level: usize, spec: &BubbleSpec) -> Result<TriMesh> {
    let base = build_icosphere(level)?;
    let mean_edge = base
        .edges()
        .iter()
        .map(|&(i, j)| geom::geodesic(base.vertices()[i], base.vertices()[j]))
        .sum::<f64>()
        / base.num_edges() as f64;
    // chart spacing near a center is half the geodesic spacing
    let compression = (CORE_EDGES * 0.5 * mean_edge / spec.concentration).clamp(1.0, MAX_COMPRESSION);
    grade_toward(&base, &spec.centers, compression)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::mass_partition;

    #[test]
    fn spec_validation() {
        assert!(BubbleSpec::new(vec![[0.0, 0.0, 1.0]], vec![], 0.1).is_err());
        assert!(BubbleSpec::new(vec![[0.0, 0.0, 1.0]], vec![-1.0], 0.1).is_err());
        assert!(BubbleSpec::new(vec![[0.0, 0.0, 1.0]; 2], vec![0.5, 0.5], 0.1).is_err());
        assert!(BubbleSpec::new(vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], vec![0.7, 0.7], 0.1).is_err());
        assert!(BubbleSpec::symmetric(5, 0.1).is_err());
        let three = BubbleSpec::symmetric(3, 0.05).unwrap();
        assert_eq!(three.singular_count(), 2);
        assert!(three.check_for_k(3).is_ok());
        assert!(three.check_for_k(2).is_err());
        let with_regular = BubbleSpec::new(vec![[0.0, 0.0, 1.0]], vec![0.5], 0.1).unwrap();
        assert_eq!(with_regular.singular_count(), 1);
        assert!((with_regular.regular_mass() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overlapping_caps_rejected() {
        let mesh = build_icosphere(1).unwrap();
        let close = BubbleSpec::new(vec![[1.0, 0.0, 0.0], [1.0, 0.1, 0.0]], vec![0.5, 0.5], 0.05).unwrap();
        assert!(matches!(bubble_family(&mesh, &close), Err(Error::Geometry(_))));
    }

    #[test]
    fn three_bubbles_hold_their_mass() {
        let spec = BubbleSpec::symmetric(3, 0.05).unwrap();
        let mesh = bubble_mesh(4, &spec).unwrap();
        let d = bubble_family(&mesh, &spec).unwrap();
        assert!((mesh.total_area(&d).unwrap() - 1.0).abs() < 1e-10);
        let part = mass_partition(&mesh, &d, spec.centers(), spec.cap_radius()).unwrap();
        for f in &part.fractions {
            assert!((f - 1.0 / 3.0).abs() < 0.01, "{f}");
        }
        assert!(part.regular < 0.05);
        // far from every cap the floor is all that is left
        let far = [0.0, 0.0, 1.0];
        let v = (0..mesh.num_vertices())
            .min_by(|&a, &b| {
                geom::geodesic(mesh.vertices()[a], far).total_cmp(&geom::geodesic(mesh.vertices()[b], far))
            })
            .unwrap();
        assert_eq!(d.values()[v], d.floor());
    }

    #[test]
    fn outside_mass_shrinks_with_concentration() {
        let mut outside = Vec::new();
        for eps in [0.1, 0.05, 0.02] {
            let spec = BubbleSpec::symmetric(2, eps).unwrap();
            let mesh = bubble_mesh(4, &spec).unwrap();
            let d = bubble_family(&mesh, &spec).unwrap();
            outside.push(mass_partition(&mesh, &d, spec.centers(), spec.cap_radius()).unwrap().regular);
        }
        assert!(outside[0] > outside[1] && outside[1] > outside[2], "{outside:?}");
    }
}
