use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bundle::{Check, Output, ReportBundle};
use super::config::{ScenarioConfig, ScenarioKind};
use crate::conformal::{
    bubble_family, bubble_mesh, critical_points, mass_partition, rational_pullback_density, uniform_density,
    ChartPoint, Density,
};
use crate::error::{Error, Result};
use crate::mesh::{build_icosphere, TriMesh};
use crate::optimizer::{maximize, OptimizerOptions, OptimizerState};
use crate::splitting::{cap_dirichlet, compare_split};
use crate::spectrum::{assemble_mass, assemble_stiffness, lowest_eigenpairs, SpectralResult, MAX_COUNT};

/// Eigenvalues reported for the round sphere: the multiplets up to `j = 3`.
const ROUND_COUNT: usize = 16;

/// Runs one scenario, writing its tables and a MANIFEST into the output
/// directory. On a compute error the MANIFEST records the failing stage and
/// the tables written so far are kept.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ReportBundle> {
    config.validate()?;
    let mut out = Output::create(config.name.as_str(), config.to_toml_string(), config.seed, &config.output_dir)?;
    let result = match config.name {
        ScenarioKind::Round => round(config, &mut out),
        ScenarioKind::Hersch => hersch(config, &mut out),
        ScenarioKind::Bubbles | ScenarioKind::Lambda3Bubbles | ScenarioKind::Conjecture => bubbles(config, &mut out),
        ScenarioKind::Branched => branched(config, &mut out),
        ScenarioKind::Split => split(config, &mut out),
        ScenarioKind::Optimize => optimize(config, &mut out),
    };
    match result {
        Ok(()) => out.finish(None),
        Err(e) => {
            let _ = out.finish(Some(&e));
            Err(e)
        }
    }
}

pub(crate) fn solve(mesh: &TriMesh, density: &Density, count: usize, tol: f64) -> Result<SpectralResult> {
    let k = assemble_stiffness(mesh)?;
    let m = assemble_mass(mesh, density)?;
    Ok(lowest_eigenpairs(&k, &m, count, tol)?.truncated(count))
}

fn at_most(name: &str, value: f64, limit: f64, source: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        value,
        target: limit,
        tolerance: format!("at most {limit}"),
        pass: value <= limit,
        source: source.into(),
    }
}

fn at_least(name: &str, value: f64, limit: f64, source: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        value,
        target: limit,
        tolerance: format!("at least {limit}"),
        pass: value >= limit,
        source: source.into(),
    }
}

fn round(c: &ScenarioConfig, out: &mut Output) -> Result<()> {
    out.stage("mesh");
    let mesh = build_icosphere(c.level())?;
    let density = Density::constant(mesh.num_vertices(), 1.0)?;
    out.stage("eigensolve");
    let res = solve(&mesh, &density, ROUND_COUNT, c.solver_tol())?;
    out.table("spectrum.csv", &res.to_csv())?;
    let ev = &res.eigenvalues;
    let mut worst = ev[0].abs() / ev[1];
    let mut spread = 0.0f64;
    for j in 1..=3usize {
        let target = (j * (j + 1)) as f64;
        let block = &ev[j * j..(j + 1) * (j + 1)];
        for l in block {
            worst = worst.max((l / target - 1.0).abs());
        }
        let hi = block.iter().copied().fold(f64::MIN, f64::max);
        let lo = block.iter().copied().fold(f64::MAX, f64::min);
        spread = spread.max((hi - lo) / target);
    }
    out.check(at_most("multiplets j(j+1), relative error", worst, 0.01, "spectrum.csv:index=0..15"));
    out.check(at_most("intra-cluster spread", spread, 0.005, "spectrum.csv:index=1..15"));
    out.summary("lambda_1", ev[1], "spectrum.csv:index=1");
    Ok(())
}

fn optimizer_options(c: &ScenarioConfig) -> OptimizerOptions {
    let d = OptimizerOptions::default();
    OptimizerOptions {
        max_iter: c.max_iter.unwrap_or(d.max_iter),
        tol: c.tol.unwrap_or(d.tol),
        rho_min: c.rho_min.unwrap_or(d.rho_min),
        seed: c.seed,
        solver_tol: c.solver_tol(),
        ..d
    }
}

/// Runs the optimizer, saving the partial trajectory if it fails.
fn run_optimizer(
    out: &mut Output,
    mesh: &TriMesh,
    k: usize,
    init: &Density,
    opts: &OptimizerOptions,
    table: &str,
) -> Result<OptimizerState> {
    match maximize(mesh, k, init, opts) {
        Ok(st) => {
            out.table(table, &st.trajectory_csv())?;
            Ok(st)
        }
        Err(e) => {
            if let Error::Optimizer { trajectory_csv, .. } = &e {
                out.table(table, trajectory_csv)?;
            }
            Err(e)
        }
    }
}

fn hersch(c: &ScenarioConfig, out: &mut Output) -> Result<()> {
    out.stage("mesh");
    let mesh = build_icosphere(c.level())?;
    let opts = optimizer_options(c);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let target = 8.0 * PI;
    let mut table = String::from("start,initial_lambda_1_area,lambda_1_area,ratio,status,iterations\n");
    let mut worst_gap = 0.0f64;
    for s in 0..c.starts() {
        out.stage(format!("start {s}"));
        let p = c.perturbation();
        let vals: Vec<f64> = (0..mesh.num_vertices()).map(|_| 1.0 + p * rng.gen_range(-1.0..1.0)).collect();
        let init = Density::from_values(vals)?;
        let st = run_optimizer(out, &mesh, 1, &init, &opts, &format!("trajectory_{s}.csv"))?;
        let ratio = st.value / target;
        let first = st.trajectory.first().map_or(st.value, |r| r.value);
        table.push_str(&format!(
            "{s},{first:.12e},{:.12e},{ratio:.9},{},{}\n",
            st.value,
            st.status.as_str(),
            st.trajectory.len()
        ));
        worst_gap = worst_gap.max((1.0 - ratio).abs());
        out.check(Check {
            name: format!("start {s}: lambda_1 A / 8 pi"),
            value: ratio,
            target: 1.0,
            tolerance: "in [0.98, 1.005]".into(),
            pass: (0.98..=1.005).contains(&ratio),
            source: format!("hersch.csv:start={s}"),
        });
    }
    out.table("hersch.csv", &table)?;
    out.summary("worst relative gap to 8 pi", worst_gap, "hersch.csv:ratio");
    Ok(())
}

fn bubbles(c: &ScenarioConfig, out: &mut Output) -> Result<()> {
    let k = c.k();
    let target = 8.0 * PI * k as f64;
    let grid = c.eps_grid();
    let mut table = String::from("eps,index,lambda,lambda_area,normalized\n");
    let mut top = Vec::new();
    let mut lower: Vec<Vec<f64>> = Vec::new();
    let mut last = None;
    for &eps in &grid {
        out.stage(format!("bubble family at eps = {eps}"));
        let spec = c.bubble_spec(eps)?;
        let mesh = bubble_mesh(c.level(), &spec)?;
        let density = bubble_family(&mesh, &spec)?;
        let res = solve(&mesh, &density, k + 1, c.solver_tol())?;
        let area = mesh.total_area(&density)?;
        for j in 1..=k {
            let l = res.eigenvalues[j];
            table.push_str(&format!(
                "{eps},{j},{l:.12e},{:.12e},{:.9}\n",
                l * area,
                l * area / (8.0 * PI)
            ));
        }
        top.push(res.eigenvalues[k] * area);
        lower.push((1..k).map(|j| res.eigenvalues[j] * area).collect());
        last = Some((spec, mesh, density));
    }
    out.table("family.csv", &table)?;
    let (best_i, best) = top
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    let src = format!("family.csv:eps={},index={k}", grid[best_i]);
    out.summary(&format!("max lambda_{k} A"), best, src.clone());
    out.summary(&format!("max lambda_{k} A / 8 pi {k}"), best / target, src.clone());
    if k <= 3 {
        out.check_within(&format!("max lambda_{k} A vs 8 pi {k}"), best, target, 0.03, src.clone());
        out.check(at_most(&format!("max lambda_{k} A / 8 pi {k}"), best / target, 1.01, src.clone()));
        let rising = top.windows(2).all(|w| w[1] >= w[0]);
        out.check(Check {
            name: format!("lambda_{k} A non-decreasing as eps shrinks"),
            value: top[top.len() - 1] / target,
            target: 1.0,
            tolerance: "monotone along the grid".into(),
            pass: rising,
            source: format!("family.csv:index={k}"),
        });
    } else {
        out.check(at_least(
            &format!("lambda_{k} A / 8 pi {k} (lower-bound evidence)"),
            best / target,
            0.95,
            src,
        ));
    }
    let m = c.m();
    for j in 1..m.min(k) {
        let seq: Vec<f64> = lower.iter().map(|v| v[j - 1]).collect();
        out.check(Check {
            name: format!("lambda_{j} A decreasing along the family"),
            value: seq[seq.len() - 1],
            target: 0.0,
            tolerance: "strictly decreasing as eps shrinks".into(),
            pass: seq.windows(2).all(|w| w[1] < w[0]),
            source: format!("family.csv:index={j}"),
        });
    }
    let (spec, mesh, density) = last.expect("nonempty grid");
    if spec.len() >= 2 {
        out.stage("mass partition");
        let part = mass_partition(&mesh, &density, spec.centers(), spec.cap_radius())?;
        let mut t = String::from("cap,fraction,weight\n");
        let mut worst = 0.0f64;
        for (i, (f, w)) in part.fractions.iter().zip(spec.weights()).enumerate() {
            t.push_str(&format!("{i},{f:.9},{w:.9}\n"));
            worst = worst.max((f / w - 1.0).abs());
        }
        t.push_str(&format!("regular,{:.9},{:.9}\n", part.regular, spec.regular_mass()));
        out.table("partition.csv", &t)?;
        out.check(at_most("cap fractions vs weights, relative error", worst, 0.05, "partition.csv"));
        if k == 3 && spec.len() == 3 {
            let case = part.designate_regular(0)?;
            out.check(at_most(
                "weight case (A_r in {1/2, 1/3, 2/3}, c/A_r in {1, 1/2, 2}), relative deviation",
                case.deviation,
                0.05,
                "partition.csv:cap=0 as regular part",
            ));
            out.summary("regular area with cap 0 as regular part", case.regular_area, "partition.csv:cap=0");
        }
    }
    Ok(())
}

fn branched(c: &ScenarioConfig, out: &mut Output) -> Result<()> {
    out.stage("map");
    let map = c.rational_map()?;
    let d = map.degree();
    let crit = critical_points(&map)?;
    let mut t = String::from("re,im,infinite,multiplicity\n");
    for p in &crit {
        match p.location {
            ChartPoint::Finite(z) => t.push_str(&format!("{:.12e},{:.12e},0,{}\n", z.re, z.im, p.multiplicity)),
            ChartPoint::Infinity => t.push_str(&format!("0,0,1,{}\n", p.multiplicity)),
        }
    }
    out.table("critical_points.csv", &t)?;
    let total: usize = crit.iter().map(|p| p.multiplicity).sum();
    out.check(Check {
        name: "critical multiplicities sum to 2d - 2".into(),
        value: total as f64,
        target: (2 * d - 2) as f64,
        tolerance: "exact".into(),
        pass: total == 2 * d - 2,
        source: "critical_points.csv".into(),
    });
    out.stage("pullback");
    let mesh = build_icosphere(c.level())?;
    let density = rational_pullback_density(&mesh, &map)?;
    let area = mesh.total_area(&density)?;
    out.table("area.csv", &format!("degree,area,area_over_4pi\n{d},{area:.12e},{:.9}\n", area / (4.0 * PI)))?;
    out.check_within("area vs 4 pi d", area, 4.0 * PI * d as f64, 0.015, "area.csv");
    out.stage("eigensolve");
    let count = (8 + 4 * d).min(MAX_COUNT);
    let res = solve(&mesh, &density, count, c.solver_tol())?;
    out.table("spectrum.csv", &res.to_csv())?;
    let below = res.eigenvalues[1..].iter().filter(|&&l| l <= 2.0 - 0.01).count();
    let at_two = res.eigenvalues.iter().filter(|&&l| (l / 2.0 - 1.0).abs() <= 0.02).count();
    out.summary("nonzero eigenvalues below 1.99", below as f64, "spectrum.csv");
    out.check(at_least("eigenvalues within 2% of 2", at_two as f64, 3.0, "spectrum.csv"));
    if d == 3 {
        out.check(at_least("nonzero eigenvalues at most 1.99", below as f64, 3.0, "spectrum.csv"));
    }
    Ok(())
}

fn split(c: &ScenarioConfig, out: &mut Output) -> Result<()> {
    let grid = c.eps_grid();
    let n = c.window();
    let mut table = String::from("eps,max_mismatch,rayleigh_violations\n");
    let mut mismatch = Vec::new();
    let mut last = None;
    for &eps in &grid {
        out.stage(format!("split at eps = {eps}"));
        let spec = c.bubble_spec(eps)?;
        let mesh = bubble_mesh(c.level(), &spec)?;
        let density = bubble_family(&mesh, &spec)?;
        let center = c.center.unwrap_or(spec.centers()[0]);
        let r = c.radius.unwrap_or(0.5 * spec.cap_radius());
        let rep = compare_split(&mesh, &density, center, r, n)?;
        out.table(&format!("split_eps_{eps}.csv"), &rep.to_csv())?;
        let viol = rep.rayleigh_violations(0.01);
        table.push_str(&format!("{eps},{:.9},{}\n", rep.max_mismatch(), viol.len()));
        mismatch.push(rep.max_mismatch());
        last = Some((mesh, center, r, viol.len()));
    }
    out.table("split.csv", &table)?;
    let eps = grid[grid.len() - 1];
    let worst = mismatch[mismatch.len() - 1];
    out.check(at_most(
        &format!("max relative mismatch at eps = {eps}"),
        worst,
        0.05,
        format!("split.csv:eps={eps}"),
    ));
    out.check(Check {
        name: "mismatch non-increasing as eps shrinks".into(),
        value: worst,
        target: 0.0,
        tolerance: "monotone along the grid".into(),
        pass: mismatch.windows(2).all(|w| w[1] <= w[0]),
        source: "split.csv".into(),
    });
    let (mesh, center, r, violations) = last.expect("nonempty grid");
    out.check(at_most(
        &format!("merged above original by more than 1% at eps = {eps}"),
        violations as f64,
        0.0,
        format!("split.csv:eps={eps}"),
    ));
    out.stage("cap Dirichlet problem");
    let dir = cap_dirichlet(&mesh, center, 2.0 * r, 1, c.solver_tol())?;
    let l = dir.result.eigenvalues[0];
    out.table("dirichlet.csv", &format!("cap_radius,lambda_0\n{:.9},{l:.12e}\n", 2.0 * r))?;
    out.check_within("hemisphere Dirichlet ground state vs 2", l, 2.0, 0.02, "dirichlet.csv");
    Ok(())
}

fn optimize(c: &ScenarioConfig, out: &mut Output) -> Result<()> {
    out.stage("mesh");
    let mesh = build_icosphere(c.level())?;
    let init = match &c.init {
        Some(p) => Density::read_text(BufReader::new(File::open(p)?), &mesh)?,
        None => uniform_density(&mesh)?,
    };
    let k = c.k();
    out.stage("optimization");
    let st = run_optimizer(out, &mesh, k, &init, &optimizer_options(c), "trajectory.csv")?;
    let mut dens = Vec::new();
    st.density.write_text(&mut dens)?;
    out.table("final_density.txt", &String::from_utf8(dens).expect("ascii output"))?;
    out.table("spectrum.csv", &st.spectrum.to_csv())?;
    let target = 8.0 * PI * k as f64;
    out.table(
        "result.csv",
        &format!(
            "k,lambda_k_area,ratio,status,iterations\n{k},{:.12e},{:.9},{},{}\n",
            st.value,
            st.value / target,
            st.status.as_str(),
            st.trajectory.len()
        ),
    )?;
    out.summary(&format!("lambda_{k} A"), st.value, "result.csv");
    let monotone = st.trajectory.windows(2).all(|w| w[1].value >= w[0].value);
    out.check(Check {
        name: "lambda_k A non-decreasing along accepted steps".into(),
        value: st.value,
        target,
        tolerance: "monotone".into(),
        pass: monotone,
        source: "trajectory.csv".into(),
    });
    if k <= 3 {
        out.check(at_most(&format!("lambda_{k} A / 8 pi {k}"), st.value / target, 1.02, "result.csv"));
    }
    Ok(())
}
