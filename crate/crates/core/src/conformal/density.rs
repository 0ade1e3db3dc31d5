use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::mesh::{check_len, TriMesh};

/// Default floor relative to the mean density.
pub const DEFAULT_RELATIVE_FLOOR: f64 = 1e-6;

/// Per-vertex conformal factor `rho` relative to the round metric, with a
/// positive floor that every value respects.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    values: Vec<f64>,
    floor: f64,
}

impl Density {
    /// Clips `values` from below at `floor`.
    pub fn with_floor(mut values: Vec<f64>, floor: f64) -> Result<Self> {
        if !(floor > 0.0) || !floor.is_finite() {
            return Err(Error::Input(format!("density floor must be positive, got {floor}")));
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::Input(format!("density value at vertex {i} is {v}")));
            }
            *v = v.max(floor);
        }
        Ok(Density { values, floor })
    }

    /// Floor set to [`DEFAULT_RELATIVE_FLOOR`] times the mean value.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("empty density".into()));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if !(mean > 0.0) {
            return Err(Error::Input(format!("density mean must be positive, got {mean}")));
        }
        Density::with_floor(values, DEFAULT_RELATIVE_FLOOR * mean)
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Density::from_values(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies values and floor by `s > 0`.
    pub fn scaled(&self, s: f64) -> Density {
        assert!(s > 0.0, "density scale must be positive");
        Density {
            values: self.values.iter().map(|v| v * s).collect(),
            floor: self.floor * s,
        }
    }

    /// Rescales so the lumped area on `mesh` is exactly one.
    pub fn normalize(&self, mesh: &TriMesh) -> Result<Density> {
        let area = mesh.total_area(self)?;
        if !(area > 0.0) {
            return Err(Error::Input(format!("cannot normalize density with area {area}")));
        }
        Ok(self.scaled(1.0 / area))
    }

    /// One value per line, in mesh vertex order.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.values {
            writeln!(out, "{v:.17e}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R, mesh: &TriMesh) -> Result<Density> {
        let mut values = Vec::with_capacity(mesh.num_vertices());
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(t.parse::<f64>().map_err(|_| Error::Parse {
                line: n + 1,
                msg: format!("cannot parse density value `{t}`"),
            })?);
        }
        check_len(mesh, &values)?;
        Density::from_values(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_icosphere;

    #[test]
    fn floor_clips_and_rejects() {
        let d = Density::with_floor(vec![0.5, -1.0, 2.0], 0.1).unwrap();
        assert_eq!(d.values(), &[0.5, 0.1, 2.0]);
        assert!(Density::with_floor(vec![1.0], 0.0).is_err());
        assert!(Density::with_floor(vec![f64::NAN], 0.1).is_err());
        assert!(Density::from_values(vec![]).is_err());
        assert!(Density::from_values(vec![-1.0, -2.0]).is_err());
        let d = Density::from_values(vec![1.0, 3.0]).unwrap();
        assert!((d.floor() - 2.0 * DEFAULT_RELATIVE_FLOOR).abs() < 1e-20);
    }

    #[test]
    fn normalize_and_text_round_trip() {
        let mesh = build_icosphere(1).unwrap();
        let vals = (0..mesh.num_vertices()).map(|i| 1.0 + 0.1 * i as f64).collect();
        let d = Density::from_values(vals).unwrap().normalize(&mesh).unwrap();
        assert!((mesh.total_area(&d).unwrap() - 1.0).abs() < 1e-13);
        let mut buf = Vec::new();
        d.write_text(&mut buf).unwrap();
        let back = Density::read_text(buf.as_slice(), &mesh).unwrap();
        assert_eq!(back.values(), d.values());
        assert!(matches!(Density::read_text("1.0\n2.0\n".as_bytes(), &mesh), Err(Error::Dimension { .. })));
        assert!(matches!(Density::read_text("1.0\nx\n".as_bytes(), &mesh), Err(Error::Parse { line: 2, .. })));
    }
}
