//! Mesh convergence of the round `lambda_1 A` with Richardson extrapolation.

use extremal::report::{convergence_study, ScenarioConfig, ScenarioKind};

fn main() -> extremal::Result<()> {
    let study = convergence_study(&ScenarioConfig::new(ScenarioKind::Round), &[2, 3, 4, 5])?;
    print!("{}", study.to_csv());
    for (q, name) in study.quantities.iter().enumerate() {
        println!("{name}: extrapolated {:?}, target {}", study.extrapolated(q), study.targets[q]);
    }
    Ok(())
}
