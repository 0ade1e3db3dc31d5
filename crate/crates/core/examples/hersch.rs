//! First-eigenvalue maximization from a perturbed round density. The
//! optimizer should climb back to the round value `lambda_1 A = 8 pi`.

use std::f64::consts::PI;

use extremal::conformal::Density;
use extremal::mesh::build_icosphere;
use extremal::optimizer::{maximize, OptimizerOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> extremal::Result<()> {
    let mesh = build_icosphere(3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let values = (0..mesh.num_vertices()).map(|_| 1.0 + 0.2 * rng.gen_range(-1.0..1.0)).collect();
    let init = Density::from_values(values)?.normalize(&mesh)?;

    let state = maximize(&mesh, 1, &init, &OptimizerOptions::default())?;
    let first = state.trajectory.first().map_or(f64::NAN, |r| r.value);
    println!("start  lambda_1 A / 8 pi = {:.5}", first / (8.0 * PI));
    println!("final  lambda_1 A / 8 pi = {:.5} after {} iterations ({})", state.value / (8.0 * PI), state.trajectory.len(), state.status.as_str());
    println!("final cluster {:?}", state.final_cluster(0.01));
    Ok(())
}
