use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::assemble::{MassMatrix, StiffnessMatrix};
use super::solver::{solve_pencil, SolveOptions, SpectralResult};
use crate::conformal::Density;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// `lambda_k * A`, the scale-invariant form of the k-th eigenvalue.
pub fn normalized_eigenvalue(
    mesh: &TriMesh,
    density: &Density,
    result: &SpectralResult,
    k: usize,
) -> Result<f64> {
    let lambda = *result.eigenvalues.get(k).ok_or(Error::IndexOutOfRange {
        index: k,
        len: result.len(),
    })?;
    Ok(lambda * mesh.total_area(density)?)
}

/// Whether two eigenvalues belong to one multiplet at relative tolerance `rel_tol`.
pub fn same_cluster(a: f64, b: f64, rel_tol: f64) -> bool {
    (a - b).abs() <= rel_tol * a.abs().max(b.abs())
}

/// Maximal run of consecutive indices around `k` whose neighbouring
/// eigenvalues differ by less than `rel_tol` relatively.
///
/// A run that reaches the end of the computed spectrum may be incomplete;
/// request more pairs than the cluster can hold.
pub fn cluster_detect(result: &SpectralResult, k: usize, rel_tol: f64) -> Range<usize> {
    let ev = &result.eigenvalues;
    if k >= ev.len() {
        return k..k;
    }
    let mut lo = k;
    while lo > 0 && same_cluster(ev[lo - 1], ev[lo], rel_tol) {
        lo -= 1;
    }
    let mut hi = k + 1;
    while hi < ev.len() && same_cluster(ev[hi - 1], ev[hi], rel_tol) {
        hi += 1;
    }
    lo..hi
}

/// Outcome of [`harmonic_map_check`].
#[derive(Debug, Clone)]
pub struct HarmonicMapReport {
    /// `max_v |s(v) - 1|` for the recombined squared norm `s = u^T G u`.
    pub deviation: f64,
    /// Positive definite recombination `G`, scaled so the area-weighted mean of `s` is 1.
    pub gram: DMatrix<f64>,
    /// Same deviation before recombination (`G` proportional to the identity).
    pub raw_deviation: f64,
}

impl HarmonicMapReport {
    /// Map `phi = G^{1/2} u` evaluated at every vertex.
    pub fn map_values(&self, result: &SpectralResult, cluster: Range<usize>) -> Vec<DVector<f64>> {
        let eig = SymmetricEigen::new(self.gram.clone());
        let root = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let n = result.eigenvectors[cluster.start].len();
        (0..n)
            .map(|v| {
                let u = DVector::from_iterator(cluster.len(), cluster.clone().map(|i| result.eigenvectors[i][v]));
                &root * u
            })
            .collect()
    }
}

/// Measures how far the eigenvector map of a cluster is from having constant
/// norm, after the best symmetric recombination of the cluster.
///
/// `G` minimizes `sum_v a_v (u(v)^T G u(v) - 1)^2` over symmetric matrices (round
/// vertex areas `a_v`), which is a small linear least-squares problem; the
/// recombination must come out positive definite.
pub fn harmonic_map_check(
    mesh: &TriMesh,
    result: &SpectralResult,
    cluster: Range<usize>,
) -> Result<HarmonicMapReport> {
    if cluster.is_empty() || cluster.end > result.len() {
        return Err(Error::IndexOutOfRange {
            index: cluster.end,
            len: result.len(),
        });
    }
    let l = cluster.len();
    let n = mesh.num_vertices();
    let area = mesh.vertex_area();
    let pairs: Vec<(usize, usize)> = (0..l).flat_map(|i| (i..l).map(move |j| (i, j))).collect();
    let np = pairs.len();
    let vec_of = |v: usize| -> Vec<f64> {
        pairs
            .iter()
            .map(|&(i, j)| {
                let p = result.eigenvectors[cluster.start + i][v] * result.eigenvectors[cluster.start + j][v];
                if i == j {
                    p
                } else {
                    2.0 * p
                }
            })
            .collect()
    };
    let mut normal = DMatrix::<f64>::zeros(np, np);
    let mut rhs = DVector::<f64>::zeros(np);
    for (v, &w) in area.iter().enumerate().take(n) {
        let f = vec_of(v);
        for a in 0..np {
            rhs[a] += w * f[a];
            for b in 0..np {
                normal[(a, b)] += w * f[a] * f[b];
            }
        }
    }
    let coeffs = normal
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| normal.svd(true, true).solve(&rhs, 1e-14).ok())
        .ok_or_else(|| Error::Geometry("singular Gram recombination".into()))?;
    let mut gram = DMatrix::<f64>::zeros(l, l);
    for (c, &(i, j)) in coeffs.iter().zip(&pairs) {
        gram[(i, j)] = *c;
        gram[(j, i)] = *c;
    }
    let min_eig = SymmetricEigen::new(gram.clone()).eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(Error::Geometry(format!(
            "Gram recombination is not positive definite (smallest eigenvalue {min_eig:.3e})"
        )));
    }

    let deviation_for = |g: &DMatrix<f64>| -> (f64, f64) {
        let s: Vec<f64> = (0..n)
            .map(|v| {
                let f = vec_of(v);
                pairs.iter().zip(&f).map(|(&(i, j), x)| g[(i, j)] * x).sum()
            })
            .collect();
        let mean = s.iter().zip(area).map(|(s, a)| s * a).sum::<f64>() / area.iter().sum::<f64>();
        (mean, s.iter().map(|s| (s / mean - 1.0).abs()).fold(0.0, f64::max))
    };
    let (mean, deviation) = deviation_for(&gram);
    let (_, raw_deviation) = deviation_for(&DMatrix::identity(l, l));
    Ok(HarmonicMapReport {
        deviation,
        gram: gram / mean,
        raw_deviation,
    })
}

/// Lowest eigenpairs with homogeneous Dirichlet conditions on every vertex
/// where `fixed` is true: the constrained rows and columns are removed.
///
/// Eigenvectors are returned on the full vertex set with zeros at fixed vertices.
pub fn dirichlet_eigenpairs(
    k: &StiffnessMatrix,
    m: &MassMatrix,
    fixed: &[bool],
    count: usize,
    tol: f64,
) -> Result<SpectralResult> {
    let n = k.dim();
    if fixed.len() != n {
        return Err(Error::Dimension { expected: n, got: fixed.len() });
    }
    let keep: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
    if keep.is_empty() {
        return Err(Error::Input("every vertex is constrained".into()));
    }
    if keep.len() == n {
        return Err(Error::Input("Dirichlet problem without constrained vertices".into()));
    }
    let sub = k.matrix().principal_submatrix(&keep);
    let mass: Vec<f64> = keep.iter().map(|&v| m.diagonal()[v]).collect();
    let mut opts = SolveOptions::new(count, tol);
    opts.deflate_constant = false;
    let mut res = solve_pencil(&sub, &mass, &opts)?;
    for u in res.eigenvectors.iter_mut() {
        let mut full = vec![0.0; n];
        for (&v, x) in keep.iter().zip(u.iter()) {
            full[v] = *x;
        }
        *u = full;
    }
    Ok(res)
}
