//! Spectrum of the round unit-area sphere on a level-4 icosphere, grouped
//! into multiplets. The continuum values are `8 pi`, `24 pi`, `48 pi` with
//! multiplicities 3, 5, 7.

use std::f64::consts::PI;

use extremal::conformal::uniform_density;
use extremal::mesh::build_icosphere;
use extremal::spectrum::{assemble_mass, assemble_stiffness, cluster_detect, lowest_eigenpairs, DEFAULT_CLUSTER_TOL};

fn main() -> extremal::Result<()> {
    let mesh = build_icosphere(4)?;
    let density = uniform_density(&mesh)?;
    let k = assemble_stiffness(&mesh)?;
    let m = assemble_mass(&mesh, &density)?;
    let result = lowest_eigenpairs(&k, &m, 16, 1e-10)?;
    let area = mesh.total_area(&density)?;

    println!("{} vertices, area {area:.6}", mesh.num_vertices());
    let mut i = 1;
    while i < result.len() {
        let c = cluster_detect(&result, i, DEFAULT_CLUSTER_TOL);
        let mean = result.eigenvalues[c.clone()].iter().sum::<f64>() / c.len() as f64;
        println!("lambda_{}..{}: multiplicity {}, lambda A / 8 pi = {:.5}", c.start, c.end - 1, c.len(), mean * area / (8.0 * PI));
        i = c.end;
    }
    Ok(())
}
