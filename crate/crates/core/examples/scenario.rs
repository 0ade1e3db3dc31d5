//! Runs a scenario from a TOML config and prints the checks written to its MANIFEST.

use extremal::report::{run_scenario, ScenarioConfig};

const CONFIG: &str = r#"
[scenario]
name = "branched"
level = 4
numerator = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
denominator = [[1.0, 0.0]]
output_dir = "out/example_branched"
"#;

fn main() -> extremal::Result<()> {
    let config = ScenarioConfig::from_toml_str(CONFIG)?;
    let bundle = run_scenario(&config)?;
    for c in &bundle.checks {
        println!("{} {}: {:.6} (target {:.6}, {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.target, c.tolerance);
    }
    println!("manifest at {}", bundle.manifest_path().display());
    Ok(())
}
