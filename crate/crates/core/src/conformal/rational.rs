use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::Density;
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::TriMesh;

/// Relative size below which a coefficient or polynomial value counts as zero.
const COEFF_EPS: f64 = 1e-14;
/// Relative tolerance of the common-root test.
const COMMON_ROOT_TOL: f64 = 1e-9;
/// Roots closer than this (relative to `1 + |z|`) are merged into one multiple root.
const ROOT_MERGE_TOL: f64 = 1e-4;

/// Complex polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(Vec<Complex64>);

impl Polynomial {
    /// Drops negligible leading coefficients.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut c = coeffs;
        while c.len() > 1 && c.last().is_some_and(|x| x.norm() <= COEFF_EPS * scale) {
            c.pop();
        }
        if c.is_empty() {
            c.push(Complex64::new(0.0, 0.0));
        }
        Polynomial(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.norm() == 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.0.len() == 1 {
            return Polynomial(vec![Complex64::new(0.0, 0.0)]);
        }
        Polynomial(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.0.len().max(other.0.len());
        let zero = Complex64::new(0.0, 0.0);
        Polynomial::new(
            (0..n)
                .map(|i| self.0.get(i).copied().unwrap_or(zero) - other.0.get(i).copied().unwrap_or(zero))
                .collect(),
        )
    }

    /// `w^d p(1/w)`: the same polynomial seen from the chart at infinity,
    /// treating it as having degree `d`.
    pub fn reversed(&self, d: usize) -> Polynomial {
        let mut c = self.0.clone();
        c.resize(d + 1, Complex64::new(0.0, 0.0));
        c.reverse();
        Polynomial(c)
    }

    /// Roots with multiplicity, from the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.0[n];
        let mut comp = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            comp[(i, n - 1)] = -self.0[i] / lead;
        }
        let roots: Vec<Complex64> = Schur::try_new(comp, 1e-15, 10_000)
            .and_then(|s| s.eigenvalues())
            .ok_or(Error::RootFinding {
                max_residual: f64::INFINITY,
            })?
            .iter()
            .map(|&z| self.polish(z))
            .collect();
        Ok(roots)
    }

    fn polish(&self, mut z: Complex64) -> Complex64 {
        let dp = self.derivative();
        for _ in 0..3 {
            let (p, q) = (self.eval(z), dp.eval(z));
            if q.norm() == 0.0 {
                break;
            }
            let step = p / q;
            let next = z - step;
            if self.eval(next).norm() < p.norm() {
                z = next;
            } else {
                break;
            }
        }
        z
    }

    /// `|p(z)|` relative to the size of its terms at `z`.
    pub fn relative_value(&self, z: Complex64) -> f64 {
        let size: f64 = self.0.iter().enumerate().map(|(i, c)| c.norm() * z.norm().powi(i as i32)).sum();
        self.eval(z).norm() / size.max(f64::MIN_POSITIVE)
    }
}

/// A point of the Riemann sphere in the standard chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPoint {
    Finite(Complex64),
    Infinity,
}

impl ChartPoint {
    pub fn to_sphere(self) -> Vec3 {
        match self {
            ChartPoint::Finite(z) => geom::from_chart(z),
            ChartPoint::Infinity => [0.0, 0.0, 1.0],
        }
    }
}

/// Branch point of a rational map with its multiplicity (ramification index minus one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub location: ChartPoint,
    pub multiplicity: usize,
}

/// Rational map `z -> N(z) / D(z)` of the Riemann sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
    degree: usize,
}

impl RationalMap {
    /// Coefficients are in ascending powers of `z`. The polynomials must not
    /// share a root and the degree `max(deg N, deg D)` must be at least one.
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        let num = Polynomial::new(num);
        let den = Polynomial::new(den);
        if den.is_zero() {
            return Err(Error::DegenerateMap("denominator is identically zero".into()));
        }
        if num.is_zero() {
            return Err(Error::DegenerateMap("numerator is identically zero".into()));
        }
        let degree = num.degree().max(den.degree());
        if degree == 0 {
            return Err(Error::DegenerateMap("constant map".into()));
        }
        // a common root shows up as a root of the lower-degree factor where the other vanishes
        let (low, high) = if num.degree() <= den.degree() { (&num, &den) } else { (&den, &num) };
        for r in low.roots()? {
            if high.relative_value(r) < COMMON_ROOT_TOL {
                return Err(Error::DegenerateMap(format!("numerator and denominator share the root {r}")));
            }
        }
        Ok(RationalMap { num, den, degree })
    }

    /// Convenience constructor from `(re, im)` pairs.
    pub fn from_pairs(num: &[(f64, f64)], den: &[(f64, f64)]) -> Result<Self> {
        let c = |v: &[(f64, f64)]| v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        RationalMap::new(c(num), c(den))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    /// Topological degree of the induced map of the sphere.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Image of a point of the unit sphere.
    pub fn apply(&self, p: Vec3) -> Vec3 {
        let (n, d) = self.homogeneous(p);
        point_from_ratio(n, d)
    }

    /// Numerator and denominator evaluated in whichever chart contains `p`
    /// comfortably; their ratio is the image in the standard chart.
    fn homogeneous(&self, p: Vec3) -> (Complex64, Complex64) {
        let (z, inverted) = geom::chart_pair(p);
        if inverted {
            let d = self.degree;
            (self.num.reversed(d).eval(z), self.den.reversed(d).eval(z))
        } else {
            (self.num.eval(z), self.den.eval(z))
        }
    }

    /// Conformal factor of the pulled-back round metric at `p`:
    /// `|N'D - ND'|^2 (1 + |z|^2)^2 / (|N|^2 + |D|^2)^2`, in the chart containing `p`.
    pub fn conformal_factor(&self, p: Vec3) -> f64 {
        let (z, inverted) = geom::chart_pair(p);
        let (n, d) = if inverted {
            (self.num.reversed(self.degree), self.den.reversed(self.degree))
        } else {
            (self.num.clone(), self.den.clone())
        };
        let (nv, dv) = (n.eval(z), d.eval(z));
        let w = n.derivative().eval(z) * dv - nv * d.derivative().eval(z);
        let s = 1.0 + z.norm_sqr();
        let h = nv.norm_sqr() + dv.norm_sqr();
        w.norm_sqr() * s * s / (h * h)
    }

    /// Wronskian `N'D - ND'`, whose roots are the finite critical points.
    pub fn wronskian(&self) -> Polynomial {
        self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()))
    }
}

/// Point of the sphere with chart coordinate `n / d`, stable when `d` is tiny.
pub(crate) fn point_from_ratio(n: Complex64, d: Complex64) -> Vec3 {
    if n.norm() <= d.norm() {
        geom::from_chart(n / d)
    } else {
        let w = d / n;
        let s = 1.0 / (1.0 + w.norm_sqr());
        [2.0 * w.re * s, -2.0 * w.im * s, (1.0 - w.norm_sqr()) * s]
    }
}

/// Pullback of the round metric under `map`, as a density on `mesh`; clipped
/// below at the default floor, which only acts near critical points.
pub fn rational_pullback_density(mesh: &TriMesh, map: &RationalMap) -> Result<Density> {
    Density::from_values(mesh.vertices().iter().map(|&p| map.conformal_factor(p)).collect())
}

/// Branch points of `map` with multiplicities summing to `2d - 2`.
///
/// Finite critical points are the roots of the Wronskian; the point at
/// infinity carries the remaining `2d - 2 - deg W`. Nearly coincident roots
/// are merged into one point of higher multiplicity.
pub fn critical_points(map: &RationalMap) -> Result<Vec<CriticalPoint>> {
    let w = map.wronskian();
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    if !w.is_zero() {
        let roots = w.roots()?;
        let mut used = vec![false; roots.len()];
        for i in 0..roots.len() {
            if used[i] {
                continue;
            }
            let mut members = vec![roots[i]];
            used[i] = true;
            for j in i + 1..roots.len() {
                if !used[j] && (roots[j] - roots[i]).norm() < ROOT_MERGE_TOL * (1.0 + roots[i].norm()) {
                    used[j] = true;
                    members.push(roots[j]);
                }
            }
            let center = members.iter().sum::<Complex64>() / members.len() as f64;
            out.push((center, members.len()));
        }
        let worst = out.iter().map(|(z, _)| w.relative_value(*z)).fold(0.0, f64::max);
        if worst > 1e-6 {
            return Err(Error::RootFinding { max_residual: worst });
        }
    }
    let finite: usize = out.iter().map(|(_, m)| m).sum();
    let total = 2 * map.degree() - 2;
    let mut points: Vec<CriticalPoint> = out
        .into_iter()
        .map(|(z, m)| CriticalPoint {
            location: ChartPoint::Finite(z),
            multiplicity: m,
        })
        .collect();
    if finite < total {
        points.push(CriticalPoint {
            location: ChartPoint::Infinity,
            multiplicity: total - finite,
        });
    }
    Ok(points)
}
