use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::conformal::Density;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::spectrum::SpectralResult;

/// Iterations of the projected-gradient solve on the spectraplex.
const SPECTRAPLEX_ITERS: usize = 400;
/// Rounds of alternation between direction and eigen-subspace.
const SUBSPACE_ROUNDS: usize = 8;

/// Ascent direction for `lambda_k * A` in the log-density variable.
#[derive(Debug, Clone)]
pub struct AscentDirection {
    /// Perturbation of `log rho` per vertex, of unit norm in the
    /// vertex-area weighted inner product (zero when no ascent exists).
    pub direction: Vec<f64>,
    /// Guaranteed first-order rate of change of `lambda_k * A` along `direction`.
    pub rate: f64,
    /// Norm of the minimal element of the subdifferential hull that was found.
    pub min_norm: f64,
    pub cluster: Range<usize>,
}

/// Multiplicity-aware ascent direction for `lambda_k` inside `cluster`.
///
/// Along a log-density perturbation `delta`, the cluster eigenvalues of
/// `lambda * A` move to first order like the eigenvalues of the symmetric
/// matrix `H(delta)_ij = <h_ij, delta>`, with the area-weighted fields
/// `h_ij = lambda rho (delta_ij - A u_i u_j)`. If `k` is the `j`-th member of a
/// cluster of size `m`, its derivative is the `j`-th eigenvalue of `H`, which is
/// the best over `(m - j)`-dimensional subspaces `V` of the smallest eigenvalue of
/// `V^T H V`. For a fixed `V` the best unit direction is the minimal-norm element
/// of `{ sum Y_ab (V^T h V)_ab : Y >= 0, tr Y = 1 }`, found by projected gradient on
/// the spectraplex. The subspace is then replaced by the top eigenvectors of
/// `H(delta)` and the two steps alternate.
pub fn subgradient_step(
    mesh: &TriMesh,
    density: &Density,
    result: &SpectralResult,
    k: usize,
    cluster: Range<usize>,
) -> Result<AscentDirection> {
    if !cluster.contains(&k) || cluster.end > result.len() {
        return Err(Error::Input(format!("index {k} is not inside the cluster {cluster:?}")));
    }
    let m = cluster.len();
    let j = k - cluster.start;
    let q = m - j;
    let n = mesh.num_vertices();
    let a = mesh.vertex_area();
    let rho = density.values();
    let area = mesh.total_area(density)?;
    let lambda = cluster.clone().map(|i| result.eigenvalues[i]).sum::<f64>() / m as f64;
    // M-normalized cluster eigenvectors
    let u: Vec<Vec<f64>> = cluster
        .clone()
        .map(|i| {
            let v = &result.eigenvectors[i];
            let s: f64 = v.iter().zip(a).zip(rho).map(|((x, a), r)| x * x * a * r).sum();
            v.iter().map(|x| x / s.sqrt()).collect()
        })
        .collect();
    let field = |basis: &DMatrix<f64>, v: usize| -> DMatrix<f64> {
        // V^T h(v) V for the current subspace
        let uv = DVector::from_iterator(m, (0..m).map(|i| u[i][v]));
        let w = basis.transpose() * uv;
        (DMatrix::identity(basis.ncols(), basis.ncols()) - &w * w.transpose() * area) * (lambda * rho[v])
    };
    let h_of = |delta: &[f64]| -> DMatrix<f64> {
        let id = DMatrix::identity(m, m);
        let mut h = DMatrix::zeros(m, m);
        for v in 0..n {
            h += field(&id, v) * (a[v] * delta[v]);
        }
        h
    };
    let ascending = |h: DMatrix<f64>| -> (Vec<f64>, DMatrix<f64>) {
        let e = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
        order.sort_by(|&x, &y| e.eigenvalues[x].total_cmp(&e.eigenvalues[y]));
        let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(m, m, |r, c| e.eigenvectors[(r, order[c])]);
        (vals, vecs)
    };

    let mut basis = if q == m {
        DMatrix::identity(m, m)
    } else {
        // start from the top eigenvectors of the averaged field
        let avg: Vec<f64> = (0..n).map(|v| field(&DMatrix::identity(m, m), v).trace() / m as f64).collect();
        let (_, vecs) = ascending(h_of(&avg));
        vecs.columns(j, q).into_owned()
    };
    let mut best: Option<AscentDirection> = None;
    let rounds = if q == m { 1 } else { SUBSPACE_ROUNDS };
    for _ in 0..rounds {
        let fields: Vec<DMatrix<f64>> = (0..n).map(|v| field(&basis, v)).collect();
        let (g, min_norm) = min_norm_element(&fields, a)?;
        let direction: Vec<f64> = if min_norm > 0.0 {
            g.iter().map(|x| x / min_norm).collect()
        } else {
            vec![0.0; n]
        };
        let (vals, vecs) = ascending(h_of(&direction));
        let rate = vals[j];
        let candidate = AscentDirection {
            direction,
            rate,
            min_norm,
            cluster: cluster.clone(),
        };
        if best.as_ref().is_none_or(|b| candidate.rate > b.rate) {
            best = Some(candidate);
        }
        if min_norm == 0.0 {
            break;
        }
        basis = vecs.columns(j, q).into_owned();
    }
    Ok(best.expect("at least one round"))
}

/// Minimal area-weighted norm of `sum_ab Y_ab f_ab` over the spectraplex,
/// returning the minimizing field and its norm.
fn min_norm_element(fields: &[DMatrix<f64>], a: &[f64]) -> Result<(Vec<f64>, f64)> {
    let q = fields[0].nrows();
    let idx: Vec<(usize, usize)> = (0..q).flat_map(|i| (0..q).map(move |j| (i, j))).collect();
    let p = idx.len();
    let mut gram = DMatrix::<f64>::zeros(p, p);
    for (f, w) in fields.iter().zip(a) {
        for (s, &(i, j)) in idx.iter().enumerate() {
            let x = f[(i, j)] * w;
            if x == 0.0 {
                continue;
            }
            for (t, &(k, l)) in idx.iter().enumerate() {
                gram[(s, t)] += x * f[(k, l)];
            }
        }
    }
    let gram = 0.5 * (&gram + gram.transpose());
    let lip = 2.0 * SymmetricEigen::new(gram.clone()).eigenvalues.max().max(f64::MIN_POSITIVE);
    let objective = |y: &DMatrix<f64>| -> f64 {
        let v = DVector::from_iterator(p, idx.iter().map(|&(i, j)| y[(i, j)]));
        v.dot(&(&gram * &v))
    };
    let gradient = |y: &DMatrix<f64>| -> DMatrix<f64> {
        let v = DVector::from_iterator(p, idx.iter().map(|&(i, j)| y[(i, j)]));
        let g = &gram * v * 2.0;
        let mut out = DMatrix::zeros(q, q);
        for (s, &(i, j)) in idx.iter().enumerate() {
            out[(i, j)] = g[s];
        }
        0.5 * (&out + out.transpose())
    };
    // accelerated projected gradient from the barycenter
    let mut y = DMatrix::<f64>::identity(q, q) / q as f64;
    let mut z = y.clone();
    let mut t = 1.0f64;
    for _ in 0..SPECTRAPLEX_ITERS {
        let next = project_spectraplex(&(&z - gradient(&z) / lip));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &next + (&next - &y) * ((t - 1.0) / t_next);
        y = next;
        t = t_next;
    }
    let value = objective(&y);
    if !value.is_finite() {
        return Err(Error::Input("subgradient subproblem produced a non-finite value".into()));
    }
    let n = fields.len();
    let g: Vec<f64> = (0..n)
        .map(|v| idx.iter().map(|&(i, j)| y[(i, j)] * fields[v][(i, j)]).sum())
        .collect();
    let norm = g.iter().zip(a).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
    Ok((g, norm))
}

/// Euclidean projection onto symmetric PSD matrices of unit trace.
fn project_spectraplex(y: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(0.5 * (y + y.transpose()));
    let lam = project_simplex(e.eigenvalues.as_slice());
    &e.eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(lam)) * e.eigenvectors.transpose()
}

fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, v) in s.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_icosphere;
    use crate::optimizer::{eigen_gradient, Functional};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singleton_cluster_follows_the_gradient() {
        let mesh = build_icosphere(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho: Vec<f64> = (0..mesh.num_vertices()).map(|_| rng.gen_range(0.5..2.0)).collect();
        let d = Density::from_values(rho).unwrap();
        let res = Functional::new(&mesh, 1, 1e-10, 1).unwrap().spectrum(&d).unwrap();
        let g = eigen_gradient(&mesh, &d, &res, 1).unwrap();
        let dir = subgradient_step(&mesh, &d, &res, 1, 1..2).unwrap();
        // the log-density direction is the gradient times rho, in the area-weighted metric
        let a = mesh.vertex_area();
        let field: Vec<f64> = g.iter().zip(a).zip(d.values()).map(|((g, a), r)| g * r / a).collect();
        let norm = field.iter().zip(a).map(|(x, a)| x * x * a).sum::<f64>().sqrt();
        for (x, y) in field.iter().zip(&dir.direction) {
            assert!((x / norm - y).abs() < 1e-10);
        }
        assert!((dir.rate - norm).abs() < 1e-9 * norm);
    }

    #[test]
    fn round_sphere_has_no_ascent_for_lambda_1() {
        let mesh = build_icosphere(3).unwrap();
        let d = Density::constant(mesh.num_vertices(), 1.0).unwrap().normalize(&mesh).unwrap();
        let f = Functional::new(&mesh, 1, 1e-10, 1).unwrap();
        let (value, res) = f.value(&d).unwrap();
        let dir = subgradient_step(&mesh, &d, &res, 1, 1..4).unwrap();
        assert!(dir.rate <= 1e-3 * value, "rate {}", dir.rate);
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let p = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let y = project_spectraplex(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        assert!((y.trace() - 1.0).abs() < 1e-12);
        assert!(SymmetricEigen::new(y).eigenvalues.min() > -1e-12);
    }
}
