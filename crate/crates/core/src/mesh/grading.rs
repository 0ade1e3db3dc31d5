use std::f64::consts::PI;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geom::{self, Frame, Vec3};

/// Largest radial-to-tangential stretch of the graded band.
pub const GRADING_STRETCH: f64 = 2.2;

/// Relocates vertices toward each center so that the chart disc around it is
/// refined by `compression` at the core, keeping connectivity.
///
/// Each center owns the chart disc reaching half way to its nearest
/// neighbour (a hemisphere for a single center). Inside the disc the chart
/// radius `r` moves to `phi(r)`, where `d log(phi) / d log(r)` rises smoothly from
/// 1 at the rim to [`GRADING_STRETCH`] and falls back to 1 at the core, so
/// the map is a plain dilation by `1 / compression` near the center and the
/// identity at the rim. The map is radial and monotone, so orientation and
/// validity are preserved.
pub fn grade_toward(mesh: &TriMesh, centers: &[Vec3], compression: f64) -> Result<TriMesh> {
    if !(compression >= 1.0) || !compression.is_finite() {
        return Err(Error::Input(format!("grading compression must be at least 1, got {compression}")));
    }
    if centers.is_empty() || compression == 1.0 {
        return Ok(mesh.clone());
    }
    let centers: Vec<Vec3> = centers.iter().map(|&c| geom::normalize(c)).collect();
    let separation = min_separation(&centers);
    if separation < 1e-6 {
        return Err(Error::Geometry("grading centers coincide".into()));
    }
    let rim = geom::chart_radius(0.5 * separation.min(PI));
    let frames: Vec<Frame> = centers.iter().map(|&c| Frame::centered_at(c)).collect();
    // width of the graded band in log-radius
    let band = 2.0 * compression.ln() / (GRADING_STRETCH - 1.0);
    mesh.map_vertices(|p| {
        for f in &frames {
            let z = f.chart(p);
            let r = z.norm();
            if r < rim && r > 0.0 {
                let u = (r / rim).ln();
                let phi = rim * (u + (GRADING_STRETCH - 1.0) * band_integral(u, band)).exp();
                return f.point(z * (phi / r));
            }
        }
        p
    })
}

/// `int_0^u sin^2(pi s / band) ds` on `[-band, 0]`, constant below.
fn band_integral(u: f64, band: f64) -> f64 {
    let u = u.max(-band);
    0.5 * u + band / (4.0 * PI) * (2.0 * PI * u / band).sin()
}

/// Smallest pairwise geodesic distance; `PI` for a single point.
pub(crate) fn min_separation(points: &[Vec3]) -> f64 {
    let mut best = PI;
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[..i] {
            best = best.min(geom::geodesic(a, b));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_icosphere, mesh_quality};

    #[test]
    fn core_is_dilated_and_rim_fixed() {
        let band = 2.0 * 8f64.ln() / (GRADING_STRETCH - 1.0);
        // total log compression over the band is ln 8
        assert!(((GRADING_STRETCH - 1.0) * band_integral(-band, band) + 8f64.ln()).abs() < 1e-12);
        assert_eq!(band_integral(0.0, band), 0.0);
    }

    #[test]
    fn graded_mesh_stays_valid() {
        let mesh = build_icosphere(3).unwrap();
        let centers = [[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]];
        let graded = grade_toward(&mesh, &centers, 10.0).unwrap();
        let q = mesh_quality(&graded).unwrap();
        assert!(q.min_angle > 15.0, "min angle {}", q.min_angle);
        assert!((graded.round_area() - mesh.round_area()).abs() < 0.02 * mesh.round_area());
        // vertices near the poles are pulled inward
        let near = |m: &TriMesh| {
            m.vertices().iter().filter(|p| geom::geodesic(**p, centers[0]) < 0.1).count()
        };
        assert!(near(&graded) > 10 * near(&mesh).max(1));
    }

    #[test]
    fn rejects_bad_compression() {
        let mesh = build_icosphere(1).unwrap();
        assert!(grade_toward(&mesh, &[[0.0, 0.0, 1.0]], 0.5).is_err());
        assert!(grade_toward(&mesh, &[[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]], 4.0).is_err());
    }
}
