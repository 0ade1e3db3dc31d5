use std::f64::consts::PI;

use super::bundle::{Check, Output, ReportBundle};
use super::config::{ScenarioConfig, ScenarioKind};
use super::scenarios::solve;
use crate::conformal::{bubble_family, bubble_mesh, rational_pullback_density, Density};
use crate::error::{Error, Result};
use crate::mesh::build_icosphere;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub vertices: usize,
    /// One value per quantity; empty when the level failed.
    pub values: Vec<f64>,
    pub error: Option<String>,
}

/// Summary quantities of a scenario over a sequence of mesh levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub scenario: ScenarioKind,
    pub quantities: Vec<String>,
    /// Continuum value each quantity should approach.
    pub targets: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Richardson estimate `v_L + (v_L - v_{L-1}) / 3` at row `i`, assuming
    /// second-order convergence in the mesh size, which halves per level.
    pub fn richardson(&self, i: usize, q: usize) -> Option<f64> {
        let (prev, row) = (self.rows.get(i.checked_sub(1)?)?, &self.rows[i]);
        if row.level != prev.level + 1 || row.error.is_some() || prev.error.is_some() {
            return None;
        }
        Some(row.values[q] + (row.values[q] - prev.values[q]) / 3.0)
    }

    /// Richardson estimate from the finest consecutive pair of levels.
    pub fn extrapolated(&self, q: usize) -> Option<f64> {
        (1..self.rows.len()).rev().find_map(|i| self.richardson(i, q))
    }

    /// Values of quantity `q` over the levels that succeeded.
    pub fn series(&self, q: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.error.is_none()).map(|r| r.values[q]).collect()
    }

    /// CSV with columns `level,vertices`, then `<quantity>,<quantity>_extrapolated` per quantity, then `error`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,vertices");
        for q in &self.quantities {
            s.push_str(&format!(",{q},{q}_extrapolated"));
        }
        s.push_str(",error\n");
        for (i, r) in self.rows.iter().enumerate() {
            s.push_str(&format!("{},{}", r.level, r.vertices));
            for q in 0..self.quantities.len() {
                match r.values.get(q) {
                    Some(v) => s.push_str(&format!(",{v:.12e}")),
                    None => s.push(','),
                }
                match self.richardson(i, q) {
                    Some(v) => s.push_str(&format!(",{v:.12e}")),
                    None => s.push(','),
                }
            }
            s.push_str(&format!(",{}\n", r.error.as_deref().unwrap_or("").replace(',', ";")));
        }
        s
    }
}

/// Evaluates the scenario's summary quantities on each level. A failing
/// level is recorded and the study continues.
pub fn convergence_study(config: &ScenarioConfig, levels: &[usize]) -> Result<ConvergenceStudy> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("levels {levels:?} must be nonempty and ascending")));
    }
    config.validate()?;
    let (quantities, targets): (Vec<&str>, Vec<f64>) = match config.name {
        ScenarioKind::Round => (vec!["lambda_1_area", "lambda_1"], vec![8.0 * PI, 2.0]),
        ScenarioKind::Branched => (vec!["area"], vec![4.0 * PI * config.rational_map()?.degree() as f64]),
        ScenarioKind::Bubbles | ScenarioKind::Lambda3Bubbles | ScenarioKind::Conjecture => {
            (vec!["lambda_k_area"], vec![8.0 * PI * config.k() as f64])
        }
        other => {
            return Err(Error::Config(format!(
                "scenario `{}` has no per-level summary",
                other.as_str()
            )))
        }
    };
    let rows = levels
        .iter()
        .map(|&level| match level_values(config, level) {
            Ok((vertices, values)) => ConvergenceRow {
                level,
                vertices,
                values,
                error: None,
            },
            Err(e) => ConvergenceRow {
                level,
                vertices: 0,
                values: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(ConvergenceStudy {
        scenario: config.name,
        quantities: quantities.into_iter().map(String::from).collect(),
        targets,
        rows,
    })
}

fn level_values(c: &ScenarioConfig, level: usize) -> Result<(usize, Vec<f64>)> {
    match c.name {
        ScenarioKind::Round => {
            let mesh = build_icosphere(level)?;
            let d = Density::constant(mesh.num_vertices(), 1.0)?;
            let res = solve(&mesh, &d, 2, c.solver_tol())?;
            let l = res.eigenvalues[1];
            Ok((mesh.num_vertices(), vec![l * mesh.total_area(&d)?, l]))
        }
        ScenarioKind::Branched => {
            let mesh = build_icosphere(level)?;
            let d = rational_pullback_density(&mesh, &c.rational_map()?)?;
            Ok((mesh.num_vertices(), vec![mesh.total_area(&d)?]))
        }
        _ => {
            let grid = c.eps_grid();
            let spec = c.bubble_spec(grid[grid.len() - 1])?;
            let mesh = bubble_mesh(level, &spec)?;
            let d = bubble_family(&mesh, &spec)?;
            let k = c.k();
            let res = solve(&mesh, &d, k + 1, c.solver_tol())?;
            Ok((mesh.num_vertices(), vec![res.eigenvalues[k] * mesh.total_area(&d)?]))
        }
    }
}

/// Runs [`convergence_study`] and writes `convergence.csv` with a MANIFEST.
/// Every quantity must approach its target monotonically; the round study
/// also requires the extrapolated `lambda_1` within 0.1% of 2.
pub fn run_convergence(config: &ScenarioConfig, levels: &[usize]) -> Result<ReportBundle> {
    let study = convergence_study(config, levels)?;
    let echo = format!(
        "{}levels = {levels:?}\n",
        config.to_toml_string()
    );
    let mut out = Output::create(
        &format!("converge-{}", config.name.as_str()),
        echo,
        config.seed,
        &config.output_dir,
    )?;
    out.table("convergence.csv", &study.to_csv())?;
    for (q, name) in study.quantities.iter().enumerate() {
        let gaps: Vec<f64> = study.series(q).iter().map(|v| (v - study.targets[q]).abs()).collect();
        out.check(Check {
            name: format!("{name} approaches {:.9} monotonically", study.targets[q]),
            value: gaps.last().copied().unwrap_or(f64::NAN),
            target: 0.0,
            tolerance: "gap decreasing with level".into(),
            pass: !gaps.is_empty() && gaps.windows(2).all(|w| w[1] < w[0]),
            source: format!("convergence.csv:{name}"),
        });
        if let Some(x) = study.extrapolated(q) {
            out.summary(&format!("{name} extrapolated"), x, format!("convergence.csv:{name}_extrapolated"));
        }
    }
    if study.scenario == ScenarioKind::Round {
        let x = study.extrapolated(1).unwrap_or(f64::NAN);
        out.check_within("extrapolated lambda_1 vs 2", x, 2.0, 0.001, "convergence.csv:lambda_1_extrapolated");
    }
    for r in &study.rows {
        if let Some(e) = &r.error {
            out.check(Check {
                name: format!("level {} computed", r.level),
                value: f64::NAN,
                target: 0.0,
                tolerance: e.clone(),
                pass: false,
                source: "convergence.csv".into(),
            });
        }
    }
    out.finish(None)
}
