use num_complex::Complex64;

use super::rational::{point_from_ratio, RationalMap};
use super::Density;
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::TriMesh;

/// Smallest admissible `|ad - bc|`.
pub const MOBIUS_DET_TOL: f64 = 1e-12;

/// Möbius transformation `z -> (a z + b) / (c z + d)` in the standard chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let m = MobiusMap { a, b, c, d };
        let det = m.det().norm();
        if !(det > MOBIUS_DET_TOL) {
            return Err(Error::DegenerateMap(format!("|ad - bc| = {det:.3e}")));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        MobiusMap { a: one, b: zero, c: zero, d: one }
    }

    /// `z -> t z`, concentrating the pulled-back area near `z = 0` for `t > 1`.
    pub fn dilation(t: f64) -> Result<Self> {
        let (zero, one) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        MobiusMap::new(Complex64::new(t, 0.0), zero, zero, one)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply_chart(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let (z, inverted) = geom::chart_pair(p);
        if inverted {
            point_from_ratio(self.a + self.b * z, self.c + self.d * z)
        } else {
            point_from_ratio(self.a * z + self.b, self.c * z + self.d)
        }
    }

    /// Jacobian of the map with respect to round area at `p`.
    pub fn conformal_factor(&self, p: Vec3) -> f64 {
        let (z, inverted) = geom::chart_pair(p);
        let (n, d) = if inverted {
            (self.a + self.b * z, self.c + self.d * z)
        } else {
            (self.a * z + self.b, self.c * z + self.d)
        };
        let s = 1.0 + z.norm_sqr();
        let h = n.norm_sqr() + d.norm_sqr();
        self.det().norm_sqr() * s * s / (h * h)
    }

    pub fn to_rational(&self) -> RationalMap {
        RationalMap::new(vec![self.b, self.a], vec![self.d, self.c]).expect("Möbius maps are nondegenerate")
    }
}

/// Pullback of the round area under `map`; total area stays `4 pi`.
pub fn mobius_pullback_density(mesh: &TriMesh, map: &MobiusMap) -> Result<Density> {
    MobiusMap::new(map.a, map.b, map.c, map.d)?;
    Density::from_values(mesh.vertices().iter().map(|&p| map.conformal_factor(p)).collect())
}

/// The round metric, normalized to unit area.
pub fn uniform_density(mesh: &TriMesh) -> Result<Density> {
    Density::constant(mesh.num_vertices(), 1.0)?.normalize(mesh)
}
