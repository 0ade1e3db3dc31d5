//! Bubble families: `m` round spheres glued at shrinking necks. Along the
//! family `lambda_m A` approaches `8 pi m` while the lower eigenvalues go to zero.

use std::f64::consts::PI;

use extremal::conformal::{bubble_family, bubble_mesh, mass_partition, BubbleSpec};
use extremal::spectrum::{assemble_mass, assemble_stiffness, lowest_eigenpairs};

fn main() -> extremal::Result<()> {
    for m in 2..=3 {
        println!("{m} bubbles");
        for eps in [0.1, 0.05, 0.02] {
            let spec = BubbleSpec::symmetric(m, eps)?;
            let mesh = bubble_mesh(5, &spec)?;
            let density = bubble_family(&mesh, &spec)?;
            let result = lowest_eigenpairs(&assemble_stiffness(&mesh)?, &assemble_mass(&mesh, &density)?, m + 2, 1e-9)?;
            let area = mesh.total_area(&density)?;
            let scaled: Vec<String> = result.eigenvalues[1..=m].iter().map(|l| format!("{:.4}", l * area / (8.0 * PI))).collect();
            let part = mass_partition(&mesh, &density, spec.centers(), spec.cap_radius())?;
            println!("  eps {eps:<5} lambda_1..{m} A / 8 pi = [{}]  cap fractions {:.3?}", scaled.join(", "), part.fractions);
        }
    }
    Ok(())
}
