use std::f64::consts::PI;
use std::ops::Range;

use super::subgradient::subgradient_step;
use crate::conformal::{Density, DEFAULT_RELATIVE_FLOOR};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::spectrum::{
    assemble_mass, assemble_stiffness, cluster_detect, lowest_eigenpairs_with, same_cluster, SolveOptions,
    SpectralResult, StiffnessMatrix, DEFAULT_CLUSTER_TOL, MAX_COUNT,
};

/// Largest eigenvalue index the optimizer accepts.
pub const MAX_K: usize = 8;
/// Extra eigenpairs computed above `k` so that clusters around it are seen whole.
const EXTRA_PAIRS: usize = 8;
/// Eigenvector overlap above which a neighbour stays in the tracked cluster.
const TRACK_OVERLAP: f64 = 0.5;
/// Improvements below this relative size count as no progress.
const MIN_PROGRESS: f64 = 1e-12;
/// Sufficient-increase fraction of the predicted first-order gain.
const ARMIJO: f64 = 0.1;
/// Smallest trial step, relative to the initial one, before the cluster is widened.
const MIN_STEP: f64 = 1e-3;
/// Largest change of `log rho` at any vertex in one step.
const MAX_LOG_STEP: f64 = 1.0;
/// Widest relative spread of eigenvalues treated together as one nonsmooth cluster.
const WIDEN_TOL: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct OptimizerOptions {
    pub max_iter: usize,
    /// Stop when the guaranteed ascent rate falls below `tol * value`.
    pub tol: f64,
    /// Absolute density floor for unit total area.
    pub rho_min: f64,
    /// Seed of the eigensolver start blocks.
    pub seed: u64,
    pub solver_tol: f64,
    pub cluster_tol: f64,
    /// First trial step in log-density (area-weighted unit direction).
    pub initial_step: f64,
    /// Relative distance to `8 pi k` at which a stop is reported as [`OptimizerStatus::BoundHit`].
    pub bound_tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_iter: 500,
            tol: 1e-4,
            rho_min: DEFAULT_RELATIVE_FLOOR / (4.0 * PI),
            seed: crate::spectrum::DEFAULT_SEED,
            solver_tol: 1e-9,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            initial_step: 1.0,
            bound_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerStatus {
    Running,
    /// Ascent rate below tolerance.
    Converged,
    /// No admissible step improves the value, or the iteration budget ran out.
    Stalled,
    /// Stopped within `bound_tol` of the ceiling `8 pi k`.
    BoundHit,
}

impl OptimizerStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerStatus::Running => "running",
            OptimizerStatus::Converged => "converged",
            OptimizerStatus::Stalled => "stalled",
            OptimizerStatus::BoundHit => "bound-hit",
        }
    }
}

/// One row of the optimization trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub iter: usize,
    /// `lambda_k * A` at the start of the iteration.
    pub value: f64,
    /// Guaranteed ascent rate of the chosen direction.
    pub grad_norm: f64,
    pub cluster_size: usize,
    /// Accepted step length (0 when no step was taken).
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub k: usize,
    pub density: Density,
    pub value: f64,
    pub status: OptimizerStatus,
    pub trajectory: Vec<TrajectoryRow>,
    /// Spectrum of the final density.
    pub spectrum: SpectralResult,
}

impl OptimizerState {
    /// CSV with columns `iter,lambda_k_area,grad_norm,cluster_size,step`.
    pub fn trajectory_csv(&self) -> String {
        trajectory_csv(&self.trajectory)
    }

    /// Cluster containing `lambda_k` in the final spectrum.
    pub fn final_cluster(&self, rel_tol: f64) -> Range<usize> {
        cluster_detect(&self.spectrum, self.k, rel_tol)
    }
}

pub(crate) fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut s = String::from("iter,lambda_k_area,grad_norm,cluster_size,step\n");
    for r in rows {
        s.push_str(&format!(
            "{},{:.12e},{:.6e},{},{:.6e}\n",
            r.iter, r.value, r.grad_norm, r.cluster_size, r.step
        ));
    }
    s
}

/// Evaluates `lambda_k * A` for densities on a fixed mesh.
pub struct Functional<'a> {
    mesh: &'a TriMesh,
    stiffness: StiffnessMatrix,
    k: usize,
    opts: SolveOptions,
}

impl<'a> Functional<'a> {
    pub fn new(mesh: &'a TriMesh, k: usize, solver_tol: f64, seed: u64) -> Result<Self> {
        let count = (k + 1 + EXTRA_PAIRS).min(MAX_COUNT).min(mesh.num_vertices());
        if k + 1 > count {
            return Err(Error::Input(format!("mesh too small for lambda_{k}")));
        }
        let mut opts = SolveOptions::new(count, solver_tol);
        opts.seed = seed;
        Ok(Functional {
            mesh,
            stiffness: assemble_stiffness(mesh)?,
            k,
            opts,
        })
    }

    pub fn spectrum(&self, density: &Density) -> Result<SpectralResult> {
        let mass = assemble_mass(self.mesh, density)?;
        lowest_eigenpairs_with(&self.stiffness, &mass, &self.opts)
    }

    pub fn value(&self, density: &Density) -> Result<(f64, SpectralResult)> {
        let res = self.spectrum(density)?;
        let v = res.eigenvalues[self.k] * self.mesh.total_area(density)?;
        Ok((v, res))
    }
}

/// Unit-area density `max(c exp(s), rho_min)` with `c` fixed by the area.
fn project(mesh: &TriMesh, log_rho: &[f64], rho_min: f64) -> Result<Density> {
    let a = mesh.vertex_area();
    let shift = log_rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let base: Vec<f64> = log_rho.iter().map(|s| (s - shift).exp()).collect();
    let area_for = |c: f64| -> f64 { base.iter().zip(a).map(|(b, a)| (c * b).max(rho_min) * a).sum() };
    let floor_area: f64 = rho_min * a.iter().sum::<f64>();
    if floor_area >= 1.0 {
        return Err(Error::Input(format!("floor {rho_min} alone exceeds unit area")));
    }
    // area_for is continuous and increasing in c
    let (mut lo, mut hi) = (0.0, 1.0);
    while area_for(hi) < 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if area_for(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let c = 0.5 * (lo + hi);
    let d = Density::with_floor(base.iter().map(|b| c * b).collect(), rho_min)?;
    d.normalize(mesh)
}

/// Maximizes `lambda_k * A` over densities on `mesh` by projected ascent in
/// `log rho` with multiplicity-aware directions and a backtracking line search.
///
/// Every accepted step strictly increases the value, so the recorded
/// trajectory is monotone. The cluster around `lambda_k` is the 1% multiplet
/// of index `k`, widened by neighbours whose eigenvectors overlap the
/// previous iterate's cluster, which keeps a splitting cluster together
/// across eigenvalue crossings.
pub fn maximize(mesh: &TriMesh, k: usize, init: &Density, opts: &OptimizerOptions) -> Result<OptimizerState> {
    if k == 0 || k > MAX_K {
        return Err(Error::ResourceLimit {
            what: "optimized eigenvalue index",
            value: k,
            max: MAX_K,
        });
    }
    if !(opts.rho_min > 0.0) {
        return Err(Error::Input(format!("rho_min {} must be positive", opts.rho_min)));
    }
    let functional = Functional::new(mesh, k, opts.solver_tol, opts.seed)?;
    let log_init: Vec<f64> = init.values().iter().map(|r| r.ln()).collect();
    let mut density = project(mesh, &log_init, opts.rho_min)?;
    let mut trajectory = Vec::new();
    let fail = |error: Error, iteration: usize, rows: &[TrajectoryRow]| Error::Optimizer {
        iteration,
        source: Box::new(error),
        trajectory_csv: trajectory_csv(rows),
    };
    let (mut value, mut spectrum) = functional.value(&density).map_err(|e| fail(e, 0, &trajectory))?;
    let ceiling = 8.0 * PI * k as f64;
    let mut step = opts.initial_step;
    let mut previous_cluster: Option<Vec<Vec<f64>>> = None;
    let mut status = OptimizerStatus::Running;

    for iter in 0..opts.max_iter {
        let tracked = tracked_cluster(mesh, &density, &spectrum, k, opts.cluster_tol, previous_cluster.as_deref());
        let log_rho: Vec<f64> = density.values().iter().map(|r| r.ln()).collect();
        let mut row = TrajectoryRow {
            iter,
            value,
            grad_norm: 0.0,
            cluster_size: tracked.len(),
            step: 0.0,
        };
        let mut accepted = None;
        let mut fallback: Option<(Density, f64, SpectralResult, f64, Range<usize>)> = None;
        let tracked_dir = subgradient_step(mesh, &density, &spectrum, k, tracked.clone())
            .map_err(|e| fail(e, iter, &trajectory))?;
        row.grad_norm = tracked_dir.rate;
        for cluster in widened_clusters(&spectrum, k, k..k + 1) {
            let dir = if cluster == tracked {
                tracked_dir.clone()
            } else {
                subgradient_step(mesh, &density, &spectrum, k, cluster.clone())
                    .map_err(|e| fail(e, iter, &trajectory))?
            };
            // wider clusters only add constraints, so their rates are no larger
            if dir.rate < opts.tol * value {
                break;
            }
            let reach = dir.direction.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let cap = if reach > 0.0 { MAX_LOG_STEP / reach } else { f64::INFINITY };
            let mut tau = (2.0 * step).min(4.0 * opts.initial_step).min(cap);
            let min_tau = MIN_STEP * opts.initial_step.min(cap);
            loop {
                let trial: Vec<f64> = log_rho.iter().zip(&dir.direction).map(|(s, d)| s + tau * d).collect();
                let cand = project(mesh, &trial, opts.rho_min).map_err(|e| fail(e, iter, &trajectory))?;
                // a trial the eigensolver cannot resolve is treated like a rejected one
                let (v, res) = match functional.value(&cand) {
                    Ok(x) => x,
                    Err(Error::NonConvergence { .. }) => (f64::NEG_INFINITY, spectrum.clone()),
                    Err(e) => return Err(fail(e, iter, &trajectory)),
                };
                if v >= value + ARMIJO * tau * dir.rate {
                    accepted = Some((cand, v, res, tau, cluster.clone()));
                    break;
                }
                if v > value * (1.0 + MIN_PROGRESS) && fallback.as_ref().is_none_or(|f| v > f.1) {
                    fallback = Some((cand, v, res, tau, cluster.clone()));
                }
                tau *= 0.5;
                if tau < min_tau {
                    break;
                }
            }
            if accepted.is_some() {
                break;
            }
        }
        if accepted.is_none() && fallback.is_none() && tracked_dir.rate < opts.tol * value {
            status = OptimizerStatus::Converged;
            trajectory.push(row);
            break;
        }
        match accepted.or(fallback) {
            Some((cand, v, res, tau, cluster)) => {
                row.step = tau;
                row.cluster_size = cluster.len();
                step = tau;
                previous_cluster = Some(cluster.map(|i| spectrum.eigenvectors[i].clone()).collect());
                density = cand;
                value = v;
                spectrum = res;
                trajectory.push(row);
            }
            None => {
                trajectory.push(row);
                status = OptimizerStatus::Stalled;
                break;
            }
        }
    }
    if status == OptimizerStatus::Running {
        status = OptimizerStatus::Stalled;
    }
    if (value / ceiling - 1.0).abs() <= opts.bound_tol {
        status = OptimizerStatus::BoundHit;
    }
    Ok(OptimizerState {
        k,
        density,
        value,
        status,
        trajectory,
        spectrum,
    })
}

/// Nested candidate clusters: `first`, then repeatedly extended by the
/// nearer neighbouring eigenvalue while the spread stays within [`WIDEN_TOL`].
fn widened_clusters(spectrum: &SpectralResult, k: usize, first: Range<usize>) -> Vec<Range<usize>> {
    let ev = &spectrum.eigenvalues;
    let mut out = vec![first.clone()];
    let mut c = first;
    loop {
        let below = (c.start > 1).then(|| ev[k] - ev[c.start - 1]);
        let above = (c.end < ev.len()).then(|| ev[c.end] - ev[k]);
        let grow_down = match (below, above) {
            (Some(b), Some(a)) => b <= a,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        let next = if grow_down { c.start - 1..c.end } else { c.start..c.end + 1 };
        if ev[next.end - 1] - ev[next.start] > WIDEN_TOL * ev[k] {
            break;
        }
        c = next;
        out.push(c.clone());
    }
    out
}

/// Multiplet of index `k`, widened by adjacent pairs that carry most of the
/// previous cluster's eigenspace and sit within two cluster tolerances.
fn tracked_cluster(
    mesh: &TriMesh,
    density: &Density,
    spectrum: &SpectralResult,
    k: usize,
    rel_tol: f64,
    previous: Option<&[Vec<f64>]>,
) -> Range<usize> {
    let mut c = cluster_detect(spectrum, k, rel_tol);
    let Some(prev) = previous else {
        return c;
    };
    let weights: Vec<f64> = mesh.vertex_area().iter().zip(density.values()).map(|(a, r)| a * r).collect();
    let overlap = |i: usize| -> f64 {
        let u = &spectrum.eigenvectors[i];
        let nu: f64 = u.iter().zip(&weights).map(|(x, w)| x * x * w).sum();
        prev.iter()
            .map(|p| {
                let np: f64 = p.iter().zip(&weights).map(|(x, w)| x * x * w).sum();
                let d: f64 = u.iter().zip(p).zip(&weights).map(|((x, y), w)| x * y * w).sum();
                d * d / (nu * np)
            })
            .sum()
    };
    let ev = &spectrum.eigenvalues;
    while c.start > 1 && same_cluster(ev[c.start - 1], ev[k], 2.0 * rel_tol) && overlap(c.start - 1) >= TRACK_OVERLAP {
        c.start -= 1;
    }
    while c.end < ev.len() && same_cluster(ev[c.end], ev[k], 2.0 * rel_tol) && overlap(c.end) >= TRACK_OVERLAP {
        c.end += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_icosphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projection_has_unit_area_and_respects_floor() {
        let mesh = build_icosphere(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let log: Vec<f64> = (0..mesh.num_vertices()).map(|_| rng.gen_range(-20.0..3.0)).collect();
        let rho_min = 1e-3;
        let d = project(&mesh, &log, rho_min).unwrap();
        assert!((mesh.total_area(&d).unwrap() - 1.0).abs() < 1e-9);
        assert!(d.min() >= rho_min * (1.0 - 1e-12));
        // above the floor the shape of exp(log) is kept
        let (i, j) = (0..log.len())
            .flat_map(|i| (0..log.len()).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && d.values()[i] > 2.0 * rho_min && d.values()[j] > 2.0 * rho_min)
            .unwrap();
        let ratio = d.values()[i] / d.values()[j];
        assert!((ratio.ln() - (log[i] - log[j])).abs() < 1e-9);
    }

    #[test]
    fn rejects_out_of_range_index() {
        let mesh = build_icosphere(1).unwrap();
        let d = Density::constant(mesh.num_vertices(), 1.0).unwrap();
        let o = OptimizerOptions::default();
        assert!(matches!(maximize(&mesh, 0, &d, &o), Err(Error::ResourceLimit { .. })));
        assert!(matches!(maximize(&mesh, MAX_K + 1, &d, &o), Err(Error::ResourceLimit { .. })));
        let bad = OptimizerOptions { rho_min: 0.0, ..OptimizerOptions::default() };
        assert!(matches!(maximize(&mesh, 1, &d, &bad), Err(Error::Input(_))));
    }

    #[test]
    fn climbs_monotonically_from_a_perturbed_start() {
        let mesh = build_icosphere(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let vals = (0..mesh.num_vertices()).map(|_| 1.0 + 0.3 * rng.gen_range(-1.0..1.0)).collect();
        let init = Density::from_values(vals).unwrap();
        let opts = OptimizerOptions { max_iter: 30, ..OptimizerOptions::default() };
        let st = maximize(&mesh, 1, &init, &opts).unwrap();
        assert!(st.trajectory.windows(2).all(|w| w[1].value >= w[0].value));
        assert!(st.value > st.trajectory[0].value);
        assert!((mesh.total_area(&st.density).unwrap() - 1.0).abs() < 1e-9);
        assert!(st.value <= 8.0 * PI * 1.001);
        assert_eq!(st.trajectory_csv().lines().count(), st.trajectory.len() + 1);
    }
}
