//! Lowest eigenpairs of the pencil `K u = lambda M u` with diagonal `M`.
//!
//! The sparse path is a restarted block Krylov method on the shift-inverted
//! operator `(K + sigma M)^{-1} M`, with full M-orthogonal reorthogonalization
//! and Rayleigh-Ritz on `K`. The only factorization is an envelope Cholesky of
//! `K + sigma M`. The constant vector, an exact null vector of the closed-mesh
//! stiffness, is deflated explicitly instead of being found by iteration.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assemble::{MassMatrix, StiffnessMatrix};
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, EnvelopeCholesky};

/// Largest number of eigenpairs the sparse solver will compute.
pub const MAX_COUNT: usize = 40;
/// Largest system the dense oracle accepts.
pub const DENSE_LIMIT: usize = 2000;
/// Residual tolerance of the first pair past the requested window, enough
/// to place its Ritz value well inside the cluster tolerance.
const GUARD_TOL: f64 = 1e-4;
/// Seed of the default start block.
pub const DEFAULT_SEED: u64 = 0x5eed_1a3b;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub count: usize,
    /// Relative residual tolerance: `||K u - lambda M u||_{M^-1} <= tol (1 + lambda)`.
    pub tol: f64,
    pub seed: u64,
    /// Budget of block expansion steps.
    pub max_steps: usize,
    /// Treat the constant vector as a known null vector.
    pub deflate_constant: bool,
    /// Shift for the factorization; defaults to `1 / trace(M)`.
    pub shift: Option<f64>,
    /// If the requested range ends inside a multiplet (relative gap below this),
    /// extend it to the whole multiplet. `None` disables.
    pub complete_cluster: Option<f64>,
}

impl SolveOptions {
    pub fn new(count: usize, tol: f64) -> Self {
        SolveOptions {
            count,
            tol,
            seed: DEFAULT_SEED,
            max_steps: 400,
            deflate_constant: true,
            shift: None,
            complete_cluster: Some(super::DEFAULT_CLUSTER_TOL),
        }
    }
}

/// Ascending eigenpairs with M-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// One vector per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||K u - lambda M u||` in the `M^{-1}` norm.
    pub residuals: Vec<f64>,
    /// Block expansion steps (sparse) or 1 (dense).
    pub iterations: usize,
    /// Linear solves with the shifted factor.
    pub solves: usize,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn truncated(mut self, count: usize) -> Self {
        self.eigenvalues.truncate(count);
        self.eigenvectors.truncate(count);
        self.residuals.truncate(count);
        self
    }

    /// CSV with columns `index,eigenvalue,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue,residual\n");
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            s.push_str(&format!("{i},{l:.12e},{r:.3e}\n"));
        }
        s
    }

    /// Eigenvectors as a dense whitespace-separated matrix, one row per vertex.
    pub fn eigenvectors_text(&self) -> String {
        let n = self.eigenvectors.first().map_or(0, Vec::len);
        let mut s = String::new();
        for v in 0..n {
            let row: Vec<String> = self.eigenvectors.iter().map(|u| format!("{:.12e}", u[v])).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

pub fn lowest_eigenpairs(
    k: &StiffnessMatrix,
    m: &MassMatrix,
    count: usize,
    tol: f64,
) -> Result<SpectralResult> {
    solve_pencil(k.matrix(), m.diagonal(), &SolveOptions::new(count, tol))
}

pub fn lowest_eigenpairs_with(
    k: &StiffnessMatrix,
    m: &MassMatrix,
    opts: &SolveOptions,
) -> Result<SpectralResult> {
    solve_pencil(k.matrix(), m.diagonal(), opts)
}

fn m_dot(m: &[f64], x: &[f64], y: &[f64]) -> f64 {
    m.iter().zip(x).zip(y).map(|((w, a), b)| w * a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn residual_norm(m: &[f64], kx: &[f64], x: &[f64], lambda: f64) -> f64 {
    m.iter()
        .zip(kx)
        .zip(x)
        .map(|((w, a), b)| {
            let r = a - lambda * w * b;
            r * r / w
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn solve_pencil(k: &CsrMatrix, m: &[f64], opts: &SolveOptions) -> Result<SpectralResult> {
    let n = k.dim();
    if m.len() != n {
        return Err(Error::Dimension { expected: n, got: m.len() });
    }
    if let Some((i, v)) = m.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Input(format!("mass matrix is not positive definite: entry {i} = {v}")));
    }
    if opts.count > MAX_COUNT {
        return Err(Error::ResourceLimit {
            what: "eigenpair count",
            value: opts.count,
            max: MAX_COUNT,
        });
    }
    if opts.count == 0 || opts.count > n {
        return Err(Error::Input(format!("cannot compute {} eigenpairs of a {n}x{n} pencil", opts.count)));
    }
    if !(opts.tol >= 1e-12) {
        return Err(Error::Input(format!("tolerance {} is below 1e-12", opts.tol)));
    }

    let area: f64 = m.iter().sum();
    let null = if opts.deflate_constant {
        Some(vec![1.0 / area.sqrt(); n])
    } else {
        None
    };
    let n_eff = n - usize::from(null.is_some());
    let base_want = opts.count - usize::from(null.is_some());
    let mut want = base_want;

    let mut eigenvalues = Vec::new();
    let mut eigenvectors = Vec::new();
    let mut residuals = Vec::new();
    if let Some(c) = &null {
        let kc = k.mul_vec(c);
        let lambda0 = c.iter().zip(&kc).map(|(a, b)| a * b).sum::<f64>();
        residuals.push(residual_norm(m, &kc, c, lambda0));
        eigenvalues.push(lambda0);
        eigenvectors.push(c.clone());
    }
    if want == 0 {
        return Ok(SpectralResult {
            eigenvalues,
            eigenvectors,
            residuals,
            iterations: 0,
            solves: 0,
        });
    }

    let sigma = opts.shift.unwrap_or(1.0 / area);
    let shifted = k.add_diagonal(&m.iter().map(|w| sigma * w).collect::<Vec<_>>());
    let chol = EnvelopeCholesky::factor(&shifted)?;

    let block = n_eff.min(8.max(want.div_ceil(3)));
    let max_basis = |want: usize| n_eff.min((2 * want + 2 * block).max(want + 4 * block));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_block = |count: usize| -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect()
    };

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut k_basis: Vec<Vec<f64>> = Vec::new();
    let mut proj: Vec<Vec<f64>> = Vec::new();
    let mut solves = 0;
    let mut steps = 0;
    let mut last_residuals = Vec::new();
    let mut guard_pending = false;

    let mut candidates = random_block(block);
    loop {
        steps += 1;
        // orthogonalize the candidate block against the basis and itself
        let mut fresh: Vec<Vec<f64>> = Vec::with_capacity(candidates.len());
        for mut w in candidates {
            let norm0 = m_dot(m, &w, &w).sqrt();
            for _ in 0..2 {
                if let Some(c) = &null {
                    let a = m_dot(m, c, &w);
                    axpy(-a, c, &mut w);
                }
                for q in basis.iter().chain(&fresh) {
                    let a = m_dot(m, q, &w);
                    axpy(-a, q, &mut w);
                }
            }
            let nrm = m_dot(m, &w, &w).sqrt();
            if nrm > 1e-8 * norm0 && basis.len() + fresh.len() < n_eff {
                w.iter_mut().for_each(|x| *x /= nrm);
                fresh.push(w);
            }
        }
        if fresh.is_empty() && basis.len() < n_eff {
            // invariant subspace reached; continue from random directions
            candidates = random_block(block);
            if steps < opts.max_steps {
                continue;
            }
            break;
        }
        for w in &fresh {
            let kw = k.mul_vec(w);
            for (row, q) in proj.iter_mut().zip(&basis) {
                row.push(q.iter().zip(&kw).map(|(a, b)| a * b).sum());
            }
            let mut row: Vec<f64> = basis.iter().map(|q| q.iter().zip(&kw).map(|(a, b)| a * b).sum()).collect();
            row.push(w.iter().zip(&kw).map(|(a, b)| a * b).sum());
            proj.push(row);
            basis.push(w.clone());
            k_basis.push(kw);
        }

        let p = basis.len();
        let h = DMatrix::from_fn(p, p, |i, j| 0.5 * (proj[i][j] + proj[j][i]));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

        let ritz = |i: usize| -> (Vec<f64>, Vec<f64>) {
            let col = order[i];
            let mut x = vec![0.0; n];
            let mut kx = vec![0.0; n];
            for j in 0..p {
                let z = eig.eigenvectors[(j, col)];
                axpy(z, &basis[j], &mut x);
                axpy(z, &k_basis[j], &mut kx);
            }
            (x, kx)
        };

        want = base_want;
        if p > want {
            // grow the wanted range to cover a multiplet cut at its end
            if let Some(ct) = opts.complete_cluster {
                while want < p && want + usize::from(null.is_some()) < MAX_COUNT {
                    let (a, b) = (theta[want - 1], theta[want]);
                    if (b - a).abs() < ct * b.abs().max(a.abs()) {
                        want += 1;
                    } else {
                        break;
                    }
                }
            }
        }

        if p >= want {
            let mut res = Vec::with_capacity(want);
            let mut converged = true;
            for (i, &th) in theta.iter().enumerate().take(want) {
                let (x, kx) = ritz(i);
                let r = residual_norm(m, &kx, &x, th);
                converged &= r <= opts.tol * (1.0 + th.abs());
                res.push(r);
            }
            last_residuals = res.clone();
            // the pair just past the window must be accurate enough to rule out
            // a multiplet cut at the window edge
            guard_pending = opts.complete_cluster.is_some()
                && p > want
                && want + usize::from(null.is_some()) < MAX_COUNT
                && {
                    let (x, kx) = ritz(want);
                    residual_norm(m, &kx, &x, theta[want]) > GUARD_TOL * (1.0 + theta[want].abs())
                };
            converged &= !guard_pending;
            if converged || p == n_eff {
                if !converged {
                    return Err(Error::NonConvergence {
                        iterations: steps,
                        worst_residual: res.iter().copied().fold(0.0, f64::max),
                        residuals: res,
                    });
                }
                for (i, &r) in res.iter().enumerate() {
                    let (x, _) = ritz(i);
                    eigenvalues.push(theta[i]);
                    eigenvectors.push(x);
                    residuals.push(r);
                }
                return Ok(SpectralResult {
                    eigenvalues,
                    eigenvectors,
                    residuals,
                    iterations: steps,
                    solves,
                });
            }
        }
        if steps >= opts.max_steps {
            break;
        }

        // expand with shift-inverted residuals of the unconverged wanted pairs,
        // or plain Krylov growth while the basis is still too small
        candidates = if p <= want {
            fresh.iter().map(|y| y.iter().zip(m).map(|(a, b)| a * b).collect()).collect()
        } else {
            (0..want)
                .filter(|&i| last_residuals[i] > opts.tol * (1.0 + theta[i].abs()))
                .chain(guard_pending.then_some(want))
                .map(|i| {
                    let (x, kx) = ritz(i);
                    kx.iter().zip(&x).zip(m).map(|((a, b), w)| a - theta[i] * w * b).collect()
                })
                .collect()
        };
        for w in candidates.iter_mut() {
            chol.solve_in_place(w);
        }
        solves += candidates.len();

        if p + candidates.len() > max_basis(want) {
            // thick restart on the lowest Ritz vectors
            let keep = p.min(want + block);
            let mut nb = Vec::with_capacity(keep);
            let mut nk = Vec::with_capacity(keep);
            for i in 0..keep {
                let (x, kx) = ritz(i);
                nb.push(x);
                nk.push(kx);
            }
            basis = nb;
            k_basis = nk;
            proj = (0..keep)
                .map(|i| (0..keep).map(|j| if i == j { theta[i] } else { 0.0 }).collect())
                .collect();
        }
    }

    Err(Error::NonConvergence {
        iterations: steps,
        worst_residual: last_residuals.iter().copied().fold(0.0, f64::max),
        residuals: last_residuals,
    })
}

/// Full dense decomposition through the similarity `M^{-1/2} K M^{-1/2}`.
pub fn dense_oracle(k: &StiffnessMatrix, m: &MassMatrix, count: usize) -> Result<SpectralResult> {
    dense_pencil(k.matrix(), m.diagonal(), count)
}

pub(crate) fn dense_pencil(k: &CsrMatrix, m: &[f64], count: usize) -> Result<SpectralResult> {
    let n = k.dim();
    if n > DENSE_LIMIT {
        return Err(Error::ResourceLimit {
            what: "dense oracle size",
            value: n,
            max: DENSE_LIMIT,
        });
    }
    if m.len() != n {
        return Err(Error::Dimension { expected: n, got: m.len() });
    }
    if count > n {
        return Err(Error::Input(format!("cannot compute {count} eigenpairs of a {n}x{n} pencil")));
    }
    let d: Vec<f64> = m.iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in k.row(i) {
            a[(i, j)] = d[i] * v * d[j];
        }
    }
    let a = 0.5 * (&a + a.transpose());
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut out = SpectralResult {
        eigenvalues: Vec::with_capacity(count),
        eigenvectors: Vec::with_capacity(count),
        residuals: Vec::with_capacity(count),
        iterations: 1,
        solves: 0,
    };
    for &c in order.iter().take(count) {
        let lambda = eig.eigenvalues[c];
        let u: Vec<f64> = (0..n).map(|v| d[v] * eig.eigenvectors[(v, c)]).collect();
        let ku = k.mul_vec(&u);
        out.residuals.push(residual_norm(m, &ku, &u, lambda));
        out.eigenvalues.push(lambda);
        out.eigenvectors.push(u);
    }
    Ok(out)
}
