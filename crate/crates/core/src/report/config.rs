use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::conformal::{BubbleSpec, RationalMap};
use crate::error::{Error, Result};
use crate::mesh::MAX_LEVEL;
use crate::optimizer::MAX_K;
use crate::splitting::MAX_SPLIT_WINDOW;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Spectrum of the round sphere.
    Round,
    /// `k = 1` maximization from random perturbations of the round metric.
    Hersch,
    /// A bubble family over a grid of concentrations.
    Bubbles,
    /// Three equal bubbles against `lambda_3`.
    Lambda3Bubbles,
    /// `k` equal bubbles against `8 pi k`, as a lower-bound observation.
    Conjecture,
    /// Pullback of the round metric by a rational map.
    Branched,
    /// Spectrum of a bubble family against the merged spectra of its pieces.
    Split,
    /// `lambda_k * A` maximization from a given or uniform density.
    Optimize,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Round => "round",
            ScenarioKind::Hersch => "hersch",
            ScenarioKind::Bubbles => "bubbles",
            ScenarioKind::Lambda3Bubbles => "lambda3-bubbles",
            ScenarioKind::Conjecture => "conjecture",
            ScenarioKind::Branched => "branched",
            ScenarioKind::Split => "split",
            ScenarioKind::Optimize => "optimize",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        toml::Value::String(s.to_string())
            .try_into()
            .map_err(|_| Error::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: ScenarioConfig,
}

/// One experiment, read from a `[scenario]` table. Unset parameters take
/// per-scenario defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: ScenarioKind,
    pub level: Option<usize>,
    pub k: Option<usize>,
    /// Number of bubbles.
    pub m: Option<usize>,
    pub eps_grid: Option<Vec<f64>>,
    pub centers: Option<Vec<[f64; 3]>>,
    pub weights: Option<Vec<f64>>,
    /// Rational map coefficients as `[re, im]` pairs in ascending powers.
    pub numerator: Option<Vec<[f64; 2]>>,
    pub denominator: Option<Vec<[f64; 2]>>,
    /// Split center; defaults to the first bubble center.
    pub center: Option<[f64; 3]>,
    /// Inner cutoff radius of the split (geodesic).
    pub radius: Option<f64>,
    /// Number of eigenvalues compared by the split.
    pub window: Option<usize>,
    /// Number of random starts of the Hersch scenario.
    pub starts: Option<usize>,
    /// Relative amplitude of the random start perturbations.
    pub perturbation: Option<f64>,
    /// Initial density file for `optimize`, one value per icosphere vertex.
    pub init: Option<PathBuf>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub rho_min: Option<f64>,
    pub solver_tol: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_seed() -> u64 {
    crate::spectrum::DEFAULT_SEED
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

const DEFAULT_EPS_GRID: [f64; 3] = [0.1, 0.05, 0.02];

impl ScenarioConfig {
    /// Configuration with every parameter at its default.
    pub fn new(name: ScenarioKind) -> Self {
        ScenarioConfig {
            name,
            level: None,
            k: None,
            m: None,
            eps_grid: None,
            centers: None,
            weights: None,
            numerator: None,
            denominator: None,
            center: None,
            radius: None,
            window: None,
            starts: None,
            perturbation: None,
            init: None,
            max_iter: None,
            tol: None,
            rho_min: None,
            solver_tol: None,
            seed: default_seed(),
            output_dir: default_output(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.scenario.validate()?;
        Ok(file.scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ConfigFile { scenario: self.clone() }).expect("config is serializable")
    }

    pub fn level(&self) -> usize {
        self.level.unwrap_or(match self.name {
            ScenarioKind::Hersch | ScenarioKind::Optimize => 3,
            _ => 5,
        })
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(match self.name {
            ScenarioKind::Lambda3Bubbles => 3,
            ScenarioKind::Conjecture => 4,
            ScenarioKind::Bubbles | ScenarioKind::Split => self.m.unwrap_or(2),
            _ => 1,
        })
    }

    /// Bubble count; defaults to `k` for the bubble scenarios.
    pub fn m(&self) -> usize {
        self.m
            .or(self.centers.as_ref().map(Vec::len))
            .unwrap_or(match self.name {
                ScenarioKind::Split => 2,
                _ => self.k(),
            })
    }

    pub fn eps_grid(&self) -> Vec<f64> {
        self.eps_grid.clone().unwrap_or(DEFAULT_EPS_GRID.to_vec())
    }

    pub fn window(&self) -> usize {
        self.window.unwrap_or(6)
    }

    pub fn starts(&self) -> usize {
        self.starts.unwrap_or(10)
    }

    pub fn perturbation(&self) -> f64 {
        self.perturbation.unwrap_or(0.2)
    }

    pub fn solver_tol(&self) -> f64 {
        self.solver_tol.unwrap_or(1e-9)
    }

    /// Bubble family at concentration `eps`.
    pub fn bubble_spec(&self, eps: f64) -> Result<BubbleSpec> {
        match &self.centers {
            Some(c) => {
                let w = self
                    .weights
                    .clone()
                    .unwrap_or_else(|| vec![1.0 / c.len() as f64; c.len()]);
                BubbleSpec::new(c.clone(), w, eps)
            }
            None => BubbleSpec::symmetric(self.m(), eps),
        }
    }

    pub fn rational_map(&self) -> Result<RationalMap> {
        let pairs = |v: &Option<Vec<[f64; 2]>>, what: &str| -> Result<Vec<(f64, f64)>> {
            v.as_ref()
                .map(|v| v.iter().map(|p| (p[0], p[1])).collect())
                .ok_or_else(|| Error::Config(format!("scenario `branched` needs `{what}`")))
        };
        RationalMap::from_pairs(&pairs(&self.numerator, "numerator")?, &pairs(&self.denominator, "denominator")?)
    }

    /// Checks every parameter the scenario will use, before any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.level() > MAX_LEVEL {
            return bad(format!("level {} exceeds {MAX_LEVEL}", self.level()));
        }
        let k = self.k();
        if k == 0 || k > MAX_K {
            return bad(format!("k = {k} must lie in 1..={MAX_K}"));
        }
        for (what, v) in [("tol", self.tol), ("rho_min", self.rho_min), ("solver_tol", self.solver_tol)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return bad(format!("{what} = {x} must be positive"));
                }
            }
        }
        match self.name {
            ScenarioKind::Round | ScenarioKind::Optimize => {
                if let Some(p) = &self.init {
                    if !p.is_file() {
                        return bad(format!("initial density file {} does not exist", p.display()));
                    }
                }
            }
            ScenarioKind::Hersch => {
                if self.starts() == 0 {
                    return bad("hersch needs at least one start".into());
                }
                let p = self.perturbation();
                if !(0.0..1.0).contains(&p) {
                    return bad(format!("perturbation {p} must lie in [0, 1)"));
                }
            }
            ScenarioKind::Bubbles | ScenarioKind::Lambda3Bubbles | ScenarioKind::Conjecture | ScenarioKind::Split => {
                let grid = self.eps_grid();
                if grid.is_empty() {
                    return bad("empty eps_grid".into());
                }
                if grid.windows(2).any(|w| w[1] >= w[0]) {
                    return bad(format!("eps_grid {grid:?} must be strictly decreasing"));
                }
                if self.weights.is_some() && self.centers.is_none() {
                    return bad("weights given without centers".into());
                }
                for &eps in &grid {
                    let spec = self.bubble_spec(eps).map_err(|e| Error::Config(e.to_string()))?;
                    if self.name != ScenarioKind::Split {
                        spec.check_for_k(k).map_err(|e| Error::Config(e.to_string()))?;
                    }
                }
                if self.name == ScenarioKind::Split {
                    let n = self.window();
                    if n == 0 || n > MAX_SPLIT_WINDOW {
                        return bad(format!("window {n} must lie in 1..={MAX_SPLIT_WINDOW}"));
                    }
                    if let Some(r) = self.radius {
                        if !(r > 0.0 && r < FRAC_PI_2) {
                            return bad(format!("split radius {r} must lie in (0, pi/2)"));
                        }
                    }
                    if let Some(c) = self.center {
                        if !(c.iter().map(|x| x * x).sum::<f64>() > 0.0) {
                            return bad("split center must be nonzero".into());
                        }
                    }
                }
            }
            ScenarioKind::Branched => {
                self.rational_map().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_echoes() {
        let c = ScenarioConfig::from_toml_str(
            "[scenario]\nname = \"lambda3-bubbles\"\nlevel = 4\neps_grid = [0.1, 0.05]\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(c.name, ScenarioKind::Lambda3Bubbles);
        assert_eq!((c.level(), c.k(), c.m()), (4, 3, 3));
        assert_eq!(ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ScenarioConfig::from_toml_str("[scenario]\nname = \"round\"\nlevle = 3\n"),
            Err(Error::Config(_))
        ));
        assert!(ScenarioConfig::from_toml_str("[scenario]\nname = \"round\"\n[other]\n").is_err());
        assert!(ScenarioConfig::from_toml_str("[scenario]\nname = \"bubbles\"\neps_grid = [0.02, 0.1]\n").is_err());
        assert!(ScenarioConfig::from_toml_str("[scenario]\nname = \"branched\"\n").is_err());
        assert!(ScenarioConfig::from_toml_str("[scenario]\nname = \"hersch\"\nk = 9\n").is_err());
        assert!(ScenarioConfig::from_toml_str("[scenario]\nname = \"nope\"\n").is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in ["round", "hersch", "bubbles", "lambda3-bubbles", "conjecture", "branched", "split", "optimize"] {
            assert_eq!(ScenarioKind::parse(s).unwrap().as_str(), s);
        }
    }
}
