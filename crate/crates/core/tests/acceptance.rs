//! Acceptance criteria. Each prints a single `criterion N PASS|FAIL` line
//! with the measured value and the tolerance.
//!
//! Criterion 8 is a recorded shortfall: the split mismatch at eps = 0.02 sits
//! above its 5% tolerance on the meshes used here. It prints FAIL and the run
//! checks that the shortfall is still present, so a change in either
//! direction is noticed.

use std::f64::consts::PI;
use std::time::Instant;

use extremal::conformal::{
    bubble_family, bubble_mesh, critical_points, mass_partition, rational_pullback_density, sphere_weight,
    uniform_density, BubbleSpec, Density, RationalMap, REGULAR_AREA_CASES,
};
use extremal::mesh::{build_icosphere, TriMesh};
use extremal::optimizer::{eigen_gradient, maximize, Functional, OptimizerOptions};
use extremal::spectrum::{
    assemble_mass, assemble_stiffness, dense_oracle, lowest_eigenpairs, SpectralResult,
};
use extremal::splitting::{cap_dirichlet, compare_split};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS_GRID: [f64; 3] = [0.1, 0.05, 0.02];
const KNOWN_SHORTFALL: &[u32] = &[8];

fn verdict(n: u32, pass: bool, detail: String) {
    println!("criterion {n:>2} {}: {detail}", if pass { "PASS" } else { "FAIL" });
    if KNOWN_SHORTFALL.contains(&n) {
        assert!(!pass, "criterion {n} now passes; update the shortfall list and the notes");
    } else {
        assert!(pass, "criterion {n} failed: {detail}");
    }
}

type Criterion = (&'static str, fn());

const CRITERIA: [Criterion; 12] = [
    ("criterion_01_round_sphere_multiplets", criterion_01_round_sphere_multiplets),
    ("criterion_02_first_eigenvalue_maximization", criterion_02_first_eigenvalue_maximization),
    ("criterion_03_two_bubble_family", criterion_03_two_bubble_family),
    ("criterion_04_three_bubble_family", criterion_04_three_bubble_family),
    ("criterion_05_three_bubble_weights", criterion_05_three_bubble_weights),
    ("criterion_06_area_quantization", criterion_06_area_quantization),
    ("criterion_07_cubic_pullback_spectrum", criterion_07_cubic_pullback_spectrum),
    ("criterion_08_split_matches_original", criterion_08_split_matches_original),
    ("criterion_09_hemisphere_dirichlet", criterion_09_hemisphere_dirichlet),
    ("criterion_10_sparse_matches_dense", criterion_10_sparse_matches_dense),
    ("criterion_11_gradient_matches_finite_differences", criterion_11_gradient_matches_finite_differences),
    ("criterion_12_four_bubble_evidence", criterion_12_four_bubble_evidence),
];

/// Runs every criterion (or those whose name contains a filter argument),
/// printing its line, and exits nonzero if any outcome is unexpected.
fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        for (name, _) in CRITERIA {
            println!("{name}: test");
        }
        return;
    }
    let mut unexpected = Vec::new();
    for (name, run) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        if std::panic::catch_unwind(run).is_err() {
            unexpected.push(name);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: every criterion matches its expected outcome");
    } else {
        println!("acceptance: unexpected outcome in {unexpected:?}");
        std::process::exit(1);
    }
}

fn spectrum(mesh: &TriMesh, density: &Density, count: usize) -> SpectralResult {
    let k = assemble_stiffness(mesh).unwrap();
    let m = assemble_mass(mesh, density).unwrap();
    lowest_eigenpairs(&k, &m, count, 1e-9).unwrap()
}

/// `lambda_j A` for `j in 0..=top` along the bubble family with `m` equal bubbles on level 5.
fn bubble_series(m: usize, top: usize) -> Vec<Vec<f64>> {
    EPS_GRID
        .iter()
        .map(|&eps| {
            let spec = BubbleSpec::symmetric(m, eps).unwrap();
            let mesh = bubble_mesh(5, &spec).unwrap();
            let density = bubble_family(&mesh, &spec).unwrap();
            let area = mesh.total_area(&density).unwrap();
            spectrum(&mesh, &density, top + 1).eigenvalues[..=top].iter().map(|l| l * area).collect()
        })
        .collect()
}

fn generic_cubic() -> RationalMap {
    RationalMap::from_pairs(&[(0.3, 0.1), (-0.5, 0.0), (0.0, 0.2), (1.0, 0.0)], &[(1.0, 0.0), (0.4, -0.3)]).unwrap()
}

fn criterion_01_round_sphere_multiplets() {
    let start = Instant::now();
    let mesh = build_icosphere(5).unwrap();
    let density = uniform_density(&mesh).unwrap();
    let ev = spectrum(&mesh, &density, 16).eigenvalues;
    let elapsed = start.elapsed().as_secs_f64();
    // scale so the unit-area round sphere has eigenvalues j(j+1) * 2 pi
    let scale = mesh.total_area(&density).unwrap() / (4.0 * PI);
    let mut worst_err = ev[0].abs();
    let mut worst_spread = 0.0f64;
    let mut first = 1;
    for j in 1..=3usize {
        let target = (j * (j + 1)) as f64;
        let block: Vec<f64> = ev[first..first + 2 * j + 1].iter().map(|l| l * scale).collect();
        first += 2 * j + 1;
        for l in &block {
            worst_err = worst_err.max((l - target).abs() / target);
        }
        let (lo, hi) = block.iter().fold((f64::MAX, f64::MIN), |(a, b), &l| (a.min(l), b.max(l)));
        worst_spread = worst_spread.max((hi - lo) / lo);
    }
    let pass = worst_err <= 0.01 && worst_spread < 0.005 && elapsed < 30.0;
    verdict(1, pass, format!("max rel error {worst_err:.2e} (<= 1e-2), max spread {worst_spread:.2e} (< 5e-3), {elapsed:.1} s (< 30 s)"));
}

fn criterion_02_first_eigenvalue_maximization() {
    let start = Instant::now();
    let mesh = build_icosphere(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut ratios = Vec::new();
    for _ in 0..10 {
        let values = (0..mesh.num_vertices()).map(|_| 1.0 + 0.2 * rng.gen_range(-1.0..1.0)).collect();
        let init = Density::from_values(values).unwrap();
        let state = maximize(&mesh, 1, &init, &OptimizerOptions::default()).unwrap();
        ratios.push(state.value / (8.0 * PI));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
    let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
    let pass = lo >= 0.98 && hi <= 1.005 && elapsed < 300.0;
    verdict(2, pass, format!("lambda_1 A / 8 pi in [{lo:.5}, {hi:.5}] over 10 starts (within [0.98, 1.005]), {elapsed:.0} s (< 300 s)"));
}

fn criterion_03_two_bubble_family() {
    let top: Vec<f64> = bubble_series(2, 2).iter().map(|v| v[2] / (16.0 * PI)).collect();
    let best = top.iter().copied().fold(f64::MIN, f64::max);
    let from_below = top.iter().all(|&r| r <= 1.0) && top.windows(2).all(|w| w[1] >= w[0]);
    let pass = (best - 1.0).abs() <= 0.03 && from_below;
    verdict(3, pass, format!("lambda_2 A / 16 pi along eps = {top:.4?}; max within 3% and increasing below 1"));
}

fn criterion_04_three_bubble_family() {
    let series = bubble_series(3, 3);
    let top: Vec<f64> = series.iter().map(|v| v[3] / (24.0 * PI)).collect();
    let best = top.iter().copied().fold(f64::MIN, f64::max);
    let low: Vec<[f64; 2]> = series.iter().map(|v| [v[1], v[2]]).collect();
    let vanishing = low.windows(2).all(|w| w[1][0] < w[0][0] && w[1][1] < w[0][1]);
    let pass = (best - 1.0).abs() <= 0.03 && best <= 1.01 && vanishing;
    verdict(
        4,
        pass,
        format!("lambda_3 A / 24 pi = {top:.4?} (max within 3%, <= 1.01); lambda_1 A, lambda_2 A = {low:.3?} decreasing"),
    );
}

fn criterion_05_three_bubble_weights() {
    let spec = BubbleSpec::symmetric(3, EPS_GRID[2]).unwrap();
    let mesh = bubble_mesh(5, &spec).unwrap();
    let density = bubble_family(&mesh, &spec).unwrap();
    let part = mass_partition(&mesh, &density, spec.centers(), spec.cap_radius()).unwrap();
    let third = sphere_weight(1, 3);
    let frac_err = part.fractions.iter().map(|f| (f - third).abs() / third).fold(0.0, f64::max);
    let case = part.designate_regular(0).unwrap();
    let weights_ok = (third - 1.0 / 3.0).abs() < 1e-15 && (sphere_weight(2, 3) - 2.0 / 3.0).abs() < 1e-15;
    let pass = frac_err <= 0.05 && case.deviation <= 0.05 && REGULAR_AREA_CASES[case.nearest_case] == 1.0 / 3.0 && weights_ok;
    verdict(
        5,
        pass,
        format!(
            "cap fractions {:.4?} vs 1/3 (max rel {frac_err:.3}); regular area {:.4} nearest case {:.4}, deviation {:.3} (<= 0.05)",
            part.fractions, case.regular_area, REGULAR_AREA_CASES[case.nearest_case], case.deviation
        ),
    );
}

fn criterion_06_area_quantization() {
    let maps = [
        RationalMap::from_pairs(&[(-0.3, 0.2), (1.0, 0.0)], &[(1.0, 0.0), (0.5, 0.1)]).unwrap(),
        RationalMap::from_pairs(&[(0.1, 0.0), (0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (0.0, -0.4)]).unwrap(),
        generic_cubic(),
    ];
    let mesh = build_icosphere(5).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for map in &maps {
        let d = map.degree();
        let area = mesh.total_area(&rational_pullback_density(&mesh, map).unwrap()).unwrap();
        let rel = (area / (4.0 * PI * d as f64) - 1.0).abs();
        let total: usize = critical_points(map).unwrap().iter().map(|c| c.multiplicity).sum();
        pass &= rel <= 0.015 && total == 2 * d - 2;
        detail.push(format!("d={d}: area rel err {rel:.4}, multiplicities {total}"));
    }
    verdict(6, pass, format!("{} (area within 1.5%, sum 2d-2 exact)", detail.join("; ")));
}

fn criterion_07_cubic_pullback_spectrum() {
    let mesh = build_icosphere(5).unwrap();
    let density = rational_pullback_density(&mesh, &generic_cubic()).unwrap();
    let ev = spectrum(&mesh, &density, 20).eigenvalues;
    let below = ev[1..].iter().filter(|&&l| l <= 2.0 - 0.01).count();
    let at_two = ev.iter().filter(|&&l| (l / 2.0 - 1.0).abs() <= 0.02).count();
    let pass = below >= 3 && ev[3] < 2.0 && at_two >= 3;
    verdict(7, pass, format!("{below} nonzero eigenvalues <= 1.99 (>= 3), lambda_3 = {:.4}, {at_two} within 2% of 2 (>= 3)", ev[3]));
}

fn criterion_08_split_matches_original() {
    let mismatch: Vec<f64> = EPS_GRID
        .iter()
        .map(|&eps| {
            let spec = BubbleSpec::symmetric(2, eps).unwrap();
            let mesh = bubble_mesh(5, &spec).unwrap();
            let density = bubble_family(&mesh, &spec).unwrap();
            compare_split(&mesh, &density, spec.centers()[0], 0.5 * spec.cap_radius(), 6).unwrap().max_mismatch()
        })
        .collect();
    let last = mismatch[mismatch.len() - 1];
    let monotone = mismatch.windows(2).all(|w| w[1] <= w[0]);
    verdict(8, last <= 0.05 && monotone, format!("max mismatch along eps = {mismatch:.4?} (last <= 0.05, non-increasing: {monotone})"));
}

fn criterion_09_hemisphere_dirichlet() {
    let mesh = build_icosphere(4).unwrap();
    let cap = cap_dirichlet(&mesh, [0.0, 0.0, 1.0], 1.0, 2, 1e-9).unwrap();
    let l0 = cap.result.eigenvalues[0];
    verdict(9, (l0 / 2.0 - 1.0).abs() <= 0.02, format!("ground state {l0:.5} vs 2 (within 2%)"));
}

fn criterion_10_sparse_matches_dense() {
    let mut meshes: Vec<TriMesh> = (0..=2).map(|l| build_icosphere(l).unwrap()).collect();
    for m in 2..=3 {
        meshes.push(bubble_mesh(2, &BubbleSpec::symmetric(m, 0.1).unwrap()).unwrap());
    }
    assert!(meshes.iter().all(|m| m.num_vertices() <= 500));
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for mesh in &meshes {
        let k = assemble_stiffness(mesh).unwrap();
        for _ in 0..20 {
            let values = (0..mesh.num_vertices()).map(|_| rng.gen_range(-1.5..1.5f64).exp()).collect();
            let m = assemble_mass(mesh, &Density::from_values(values).unwrap()).unwrap();
            let dense = dense_oracle(&k, &m, 10).unwrap().eigenvalues;
            let sparse = lowest_eigenpairs(&k, &m, 10, 1e-12).unwrap().eigenvalues;
            for (s, d) in sparse.iter().zip(&dense).take(10) {
                worst = worst.max((s - d).abs() / d.abs().max(dense[1]));
            }
            cases += 1;
        }
    }
    verdict(10, worst <= 1e-8, format!("{cases} cases on {} meshes, worst relative difference {worst:.2e} (<= 1e-8)", meshes.len()));
}

fn criterion_11_gradient_matches_finite_differences() {
    let mesh = build_icosphere(2).unwrap();
    let f = Functional::new(&mesh, 5, 1e-12, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 50 {
        let rho: Vec<f64> = (0..mesh.num_vertices()).map(|_| rng.gen_range(-0.5..0.5f64).exp()).collect();
        let density = Density::from_values(rho.clone()).unwrap();
        let res = f.spectrum(&density).unwrap();
        let k = rng.gen_range(1..=5);
        let Ok(grad) = eigen_gradient(&mesh, &density, &res, k) else { continue };
        let dir: Vec<f64> = rho.iter().map(|r| r * rng.gen_range(-1.0..1.0)).collect();
        let h = 1e-5;
        let eval = |s: f64| {
            let d = Density::from_values(rho.iter().zip(&dir).map(|(r, e)| r + s * e).collect()).unwrap();
            f.spectrum(&d).unwrap().eigenvalues[k] * mesh.total_area(&d).unwrap()
        };
        let fd = (eval(h) - eval(-h)) / (2.0 * h);
        let an: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
        worst = worst.max((fd - an).abs() / an.abs().max(1e-3 * res.eigenvalues[k]));
        checked += 1;
    }
    verdict(11, worst <= 1e-4, format!("{checked} pairs, worst relative disagreement {worst:.2e} (<= 1e-4)"));
}

fn criterion_12_four_bubble_evidence() {
    let top: Vec<f64> = bubble_series(4, 4).iter().map(|v| v[4] / (32.0 * PI)).collect();
    let best = top.iter().copied().fold(f64::MIN, f64::max);
    verdict(12, best >= 0.95, format!("lambda_4 A / 32 pi along eps = {top:.4?}; lower-bound observation, max {best:.4} (>= 0.95)"));
}
