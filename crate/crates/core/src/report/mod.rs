//! Config-driven scenarios with CSV tables and a MANIFEST per run.

mod bundle;
mod config;
mod converge;
mod scenarios;

pub use bundle::{Check, ReportBundle};
pub use config::{ScenarioConfig, ScenarioKind};
pub use converge::{convergence_study, run_convergence, ConvergenceRow, ConvergenceStudy};
pub use scenarios::run_scenario;
