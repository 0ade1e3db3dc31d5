use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use extremal::report::{run_convergence, run_scenario, ReportBundle, ScenarioConfig, ScenarioKind};
use extremal::{Error, Result};

/// Spectral-geometry workbench: eigenvalue extremization on the sphere.
///
/// Exit code 0 when every declared tolerance is met, 1 on a tolerance
/// failure, 2 on a compute or input error.
#[derive(Parser)]
#[command(name = "extremal", version)]
struct Cli {
    /// Output directory (overrides the config's `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML file with a `[scenario]` table.
    Run { config: PathBuf },
    /// Maximize lambda_1 * A from random perturbations of the round metric.
    Hersch {
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long, default_value_t = 10)]
        starts: usize,
    },
    /// Evaluate a bubble family over a grid of concentrations.
    Bubbles {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.02")]
        eps_grid: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        level: usize,
    },
    /// Pull back the round metric by a rational map read from a TOML file
    /// with `numerator` and `denominator` lists of `[re, im]` pairs.
    Branched {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 5)]
        level: usize,
    },
    /// Compare a bubble family's spectrum with the merged spectra of its pieces.
    Split {
        /// Cut center as `x,y,z`; defaults to the first bubble.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        center: Option<Vec<f64>>,
        /// Inner cutoff radius (geodesic); the cutoff ends at twice this.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.02")]
        eps_grid: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        level: usize,
    },
    /// Maximize lambda_k * A from a density file (uniform if omitted).
    Optimize {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Tabulate a scenario's summary over mesh levels with an extrapolated estimate.
    Converge {
        /// One of `round`, `branched` (z^2 unless a map is given), `bubbles`, `lambda3-bubbles`, `conjecture`.
        #[arg(long)]
        scenario: String,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        levels: Vec<usize>,
        #[arg(long)]
        map: Option<PathBuf>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    numerator: Vec<[f64; 2]>,
    denominator: Vec<[f64; 2]>,
}

fn read_map(config: &mut ScenarioConfig, path: &PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let map: MapFile = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.numerator = Some(map.numerator);
    config.denominator = Some(map.denominator);
    Ok(())
}

fn config_for(cli: &Cli) -> Result<(ScenarioConfig, Option<Vec<usize>>)> {
    let mut c;
    let mut levels = None;
    match &cli.command {
        Command::Run { config } => {
            c = ScenarioConfig::from_toml_str(&std::fs::read_to_string(config)?)?;
        }
        Command::Hersch { level, starts } => {
            c = ScenarioConfig::new(ScenarioKind::Hersch);
            c.level = Some(*level);
            c.starts = Some(*starts);
        }
        Command::Bubbles { k, m, eps_grid, level } => {
            c = ScenarioConfig::new(match (k, m) {
                (3, None | Some(3)) => ScenarioKind::Lambda3Bubbles,
                (k, None) if *k >= 4 => ScenarioKind::Conjecture,
                _ => ScenarioKind::Bubbles,
            });
            c.k = Some(*k);
            c.m = *m;
            c.eps_grid = Some(eps_grid.clone());
            c.level = Some(*level);
        }
        Command::Branched { map, level } => {
            c = ScenarioConfig::new(ScenarioKind::Branched);
            read_map(&mut c, map)?;
            c.level = Some(*level);
        }
        Command::Split { center, r, m, eps_grid, n, level } => {
            c = ScenarioConfig::new(ScenarioKind::Split);
            c.center = center.as_ref().map(|v| [v[0], v[1], v[2]]);
            c.radius = *r;
            c.m = Some(*m);
            c.eps_grid = Some(eps_grid.clone());
            c.window = Some(*n);
            c.level = Some(*level);
        }
        Command::Optimize { k, init, level, max_iter } => {
            c = ScenarioConfig::new(ScenarioKind::Optimize);
            c.k = Some(*k);
            c.init = init.clone();
            c.level = Some(*level);
            c.max_iter = *max_iter;
        }
        Command::Converge { scenario, levels: l, map } => {
            c = ScenarioConfig::new(ScenarioKind::parse(scenario)?);
            if c.name == ScenarioKind::Branched {
                match map {
                    Some(p) => read_map(&mut c, p)?,
                    None => {
                        c.numerator = Some(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
                        c.denominator = Some(vec![[1.0, 0.0]]);
                    }
                }
            }
            levels = Some(l.clone());
        }
    }
    if let Some(out) = &cli.out {
        c.output_dir = out.clone();
    } else if !matches!(cli.command, Command::Run { .. }) {
        c.output_dir = PathBuf::from("out").join(c.name.as_str());
    }
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    Ok((c, levels))
}

fn report(bundle: &ReportBundle) {
    for c in &bundle.checks {
        println!(
            "{} {}: {:.6} (target {:.6}, {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.target,
            c.tolerance
        );
    }
    println!("outputs in {}", bundle.output_dir.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config_for(&cli).and_then(|(c, levels)| match levels {
        Some(l) => run_convergence(&c, &l),
        None => run_scenario(&c),
    });
    match result {
        Ok(bundle) => {
            report(&bundle);
            if bundle.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
