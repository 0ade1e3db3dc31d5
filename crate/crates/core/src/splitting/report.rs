use std::fmt;

use crate::conformal::Density;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::TriMesh;
use crate::spectrum::{assemble_mass, assemble_stiffness, lowest_eigenpairs, SpectralResult};

use super::transplant::split_density;

/// Largest window `compare_split` accepts.
pub const MAX_SPLIT_WINDOW: usize = 12;
const SOLVE_TOL: f64 = 1e-9;

/// Which piece of a split a merged eigenvalue came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    /// The outer piece, on the original mesh.
    A,
    /// The transplanted inner piece.
    B,
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Piece::A => "A",
            Piece::B => "B",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SplitReport {
    pub original: Vec<f64>,
    pub component_a: Vec<f64>,
    pub component_b: Vec<f64>,
    /// Multiset union of the two component spectra, ascending, truncated to
    /// the window, tagged with the source piece.
    pub merged: Vec<(f64, Piece)>,
    /// `|merged_i - original_i|` over the top of the window,
    /// `max(original_{N-1}, merged_{N-1})`.
    pub mismatch: Vec<f64>,
}

impl SplitReport {
    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn max_mismatch(&self) -> f64 {
        self.mismatch.iter().copied().fold(0.0, f64::max)
    }

    /// Indices where a merged eigenvalue exceeds the original by more than
    /// the relative tolerance.
    pub fn rayleigh_violations(&self, rel_tol: f64) -> Vec<usize> {
        let scale = self.scale();
        (0..self.len())
            .filter(|&i| self.merged[i].0 > self.original[i] + rel_tol * scale)
            .collect()
    }

    fn scale(&self) -> f64 {
        let n = self.len();
        self.original[n - 1].max(self.merged[n - 1].0)
    }

    /// CSV with columns `index,lambda_orig,lambda_merged,source,rel_mismatch`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,lambda_orig,lambda_merged,source,rel_mismatch\n");
        for i in 0..self.len() {
            s.push_str(&format!(
                "{i},{:.12e},{:.12e},{},{:.6e}\n",
                self.original[i], self.merged[i].0, self.merged[i].1, self.mismatch[i]
            ));
        }
        s
    }
}

fn spectrum(mesh: &TriMesh, density: &Density, n: usize) -> Result<SpectralResult> {
    let k = assemble_stiffness(mesh)?;
    let m = assemble_mass(mesh, density)?;
    lowest_eigenpairs(&k, &m, n, SOLVE_TOL)
}

/// Compares the lowest `n` eigenvalues of `density` with the merged spectra
/// of its two pieces cut at geodesic radius `r` around `center`.
///
/// Neither piece is rescaled: both carry the measure of the original, so
/// the two spectra are compared without normalization. The mismatch is
/// relative to the top of the window, since the lowest eigenvalues vanish
/// on both sides.
pub fn compare_split(mesh: &TriMesh, density: &Density, center: Vec3, r: f64, n: usize) -> Result<SplitReport> {
    if n == 0 || n > MAX_SPLIT_WINDOW {
        return Err(Error::ResourceLimit {
            what: "split comparison window",
            value: n,
            max: MAX_SPLIT_WINDOW,
        });
    }
    let pieces = split_density(mesh, density, center, r)?;
    let original = spectrum(mesh, density, n)?.eigenvalues[..n].to_vec();
    let component_a = spectrum(mesh, &pieces.outer, n)?.eigenvalues[..n].to_vec();
    let component_b = spectrum(&pieces.inner_mesh, &pieces.inner, n)?.eigenvalues[..n].to_vec();
    let mut merged: Vec<(f64, Piece)> = component_a
        .iter()
        .map(|&x| (x, Piece::A))
        .chain(component_b.iter().map(|&x| (x, Piece::B)))
        .collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    merged.truncate(n);
    let scale = original[n - 1].max(merged[n - 1].0);
    let mismatch = original.iter().zip(&merged).map(|(a, b)| (a - b.0).abs() / scale).collect();
    Ok(SplitReport {
        original,
        component_a,
        component_b,
        merged,
        mismatch,
    })
}
