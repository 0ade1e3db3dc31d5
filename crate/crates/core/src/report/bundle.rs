use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A declared tolerance and whether the computed value met it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    /// Human-readable form of the tolerance, e.g. `within 3%`.
    pub tolerance: String,
    pub pass: bool,
    /// Table and row the value is read from.
    pub source: String,
}

/// Everything a scenario run produced.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub scenario: String,
    /// Configuration echo, as TOML.
    pub config: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub tables: Vec<PathBuf>,
    /// Summary scalars with the table row each comes from.
    pub summary: Vec<(String, f64, String)>,
    pub checks: Vec<Check>,
}

impl ReportBundle {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.0 == name).map(|s| s.1)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.output_dir.join("MANIFEST")
    }

    fn manifest(&self, failure: Option<(&str, &Error)>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "seed: {}", self.seed);
        s.push_str("inputs:\n");
        for line in self.config.lines() {
            let _ = writeln!(s, "  {line}");
        }
        s.push_str("tables:\n");
        for t in &self.tables {
            let name = t.file_name().map_or_else(|| t.display().to_string(), |n| n.to_string_lossy().into_owned());
            let _ = writeln!(s, "  {name}");
        }
        s.push_str("summary:\n");
        for (name, v, src) in &self.summary {
            let _ = writeln!(s, "  {name} = {v:.9e} [{src}]");
        }
        s.push_str("checks:\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "  {} {}: value {:.9e}, target {:.9e}, {} [{}]",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.target,
                c.tolerance,
                c.source
            );
        }
        let status = match failure {
            Some((stage, e)) => format!("error during {stage}: {e}"),
            None if self.passed() => "all tolerances met".into(),
            None => "tolerance failure".into(),
        };
        let _ = writeln!(s, "status: {status}");
        s
    }
}

/// Single writer for one scenario's output directory.
pub(crate) struct Output {
    bundle: ReportBundle,
    stage: String,
}

impl Output {
    pub(crate) fn create(scenario: &str, config: String, seed: u64, dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            bundle: ReportBundle {
                scenario: scenario.to_string(),
                config,
                seed,
                output_dir: dir.to_path_buf(),
                tables: Vec::new(),
                summary: Vec::new(),
                checks: Vec::new(),
            },
            stage: "setup".into(),
        })
    }

    /// Names the step running now, for the MANIFEST of a failed run.
    pub(crate) fn stage(&mut self, stage: impl Into<String>) {
        self.stage = stage.into();
    }

    pub(crate) fn table(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.bundle.output_dir.join(name);
        fs::write(&path, contents)?;
        self.bundle.tables.push(path);
        Ok(())
    }

    pub(crate) fn summary(&mut self, name: &str, value: f64, source: impl Into<String>) {
        self.bundle.summary.push((name.to_string(), value, source.into()));
    }

    pub(crate) fn check(&mut self, check: Check) {
        self.bundle.checks.push(check);
    }

    /// Records `value` against `target` with relative tolerance `rel`.
    pub(crate) fn check_within(&mut self, name: &str, value: f64, target: f64, rel: f64, source: impl Into<String>) {
        self.check(Check {
            name: name.into(),
            value,
            target,
            tolerance: format!("within {}%", rel * 100.0),
            pass: (value - target).abs() <= rel * target.abs(),
            source: source.into(),
        });
    }

    pub(crate) fn finish(self, failure: Option<&Error>) -> Result<ReportBundle> {
        let text = self.bundle.manifest(failure.map(|e| (self.stage.as_str(), e)));
        fs::write(self.bundle.manifest_path(), text)?;
        Ok(self.bundle)
    }
}
