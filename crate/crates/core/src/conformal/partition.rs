use super::Density;
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::TriMesh;

/// Share of the total area inside disjoint geodesic caps.
#[derive(Debug, Clone, PartialEq)]
pub struct MassPartition {
    /// Fraction inside the cap around each center.
    pub fractions: Vec<f64>,
    /// Fraction outside every cap.
    pub regular: f64,
}

/// Fractions of the area of `(mesh, density)` inside caps of geodesic
/// radius `r` around `centers`, plus the remainder.
pub fn mass_partition(mesh: &TriMesh, density: &Density, centers: &[Vec3], r: f64) -> Result<MassPartition> {
    if !(r > 0.0) {
        return Err(Error::Input(format!("cap radius {r} must be positive")));
    }
    let centers: Vec<Vec3> = centers.iter().map(|&c| geom::normalize(c)).collect();
    for (i, &a) in centers.iter().enumerate() {
        for &b in &centers[..i] {
            if geom::geodesic(a, b) <= 2.0 * r {
                return Err(Error::Geometry(format!(
                    "caps of radius {r:.4} around centers {:.4} apart overlap",
                    geom::geodesic(a, b)
                )));
            }
        }
    }
    let total = mesh.total_area(density)?;
    let mut fractions = vec![0.0; centers.len()];
    for ((p, a), rho) in mesh.vertices().iter().zip(mesh.vertex_area()).zip(density.values()) {
        if let Some(i) = centers.iter().position(|&c| geom::geodesic(*p, c) < r) {
            fractions[i] += a * rho / total;
        }
    }
    let regular = 1.0 - fractions.iter().sum::<f64>();
    Ok(MassPartition { fractions, regular })
}

/// Regular-area values allowed by the weight formulas for the third eigenvalue.
pub const REGULAR_AREA_CASES: [f64; 3] = [0.5, 1.0 / 3.0, 2.0 / 3.0];
/// Allowed ratios `c_j / A_r` between a bubble weight and the regular area.
pub const WEIGHT_RATIO_CASES: [f64; 3] = [1.0, 0.5, 2.0];

/// A partition read with one cap designated as the regular part.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightCase {
    pub regular_area: f64,
    pub weights: Vec<f64>,
    /// `c_j / A_r` for every other cap.
    pub ratios: Vec<f64>,
    /// Index into [`REGULAR_AREA_CASES`] of the closest case.
    pub nearest_case: usize,
    /// Largest relative distance of the ratios and the regular area from their nearest allowed values.
    pub deviation: f64,
}

impl MassPartition {
    /// Treats cap `index` (plus the mass outside all caps) as the regular
    /// part and the remaining caps as the singular weights.
    pub fn designate_regular(&self, index: usize) -> Result<WeightCase> {
        if index >= self.fractions.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.fractions.len(),
            });
        }
        let regular_area = self.fractions[index] + self.regular;
        let weights: Vec<f64> = self
            .fractions
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, &f)| f)
            .collect();
        let ratios: Vec<f64> = weights.iter().map(|c| c / regular_area).collect();
        let nearest = |x: f64, set: &[f64]| -> (usize, f64) {
            set.iter()
                .enumerate()
                .map(|(i, &v)| (i, (x - v).abs() / v))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
        };
        let (nearest_case, mut deviation) = nearest(regular_area, &REGULAR_AREA_CASES);
        for &q in &ratios {
            deviation = deviation.max(nearest(q, &WEIGHT_RATIO_CASES).1);
        }
        Ok(WeightCase {
            regular_area,
            weights,
            ratios,
            nearest_case,
            deviation,
        })
    }
}

/// Weight `Lambda_m / Lambda_k = m / k` of a bubble carrying the m-th extremal
/// sphere inside a `lambda_k`-extremal limit, using `Lambda_m(S^2) = 8 pi m`
/// (known for `m <= 3`).
pub fn sphere_weight(m: usize, k: usize) -> f64 {
    m as f64 / k as f64
}
