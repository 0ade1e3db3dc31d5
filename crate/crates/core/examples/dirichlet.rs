//! Dirichlet spectrum of a geodesic cap, transplanted onto a hemisphere.
//! For the round hemisphere the lowest eigenvalues are 2 and 6.

use extremal::mesh::build_icosphere;
use extremal::splitting::cap_dirichlet;

fn main() -> extremal::Result<()> {
    let mesh = build_icosphere(4)?;
    for radius in [0.3, 0.6, 1.0] {
        let cap = cap_dirichlet(&mesh, [0.0, 0.0, 1.0], radius, 4, 1e-9)?;
        let free = cap.fixed.iter().filter(|f| !**f).count();
        println!("cap radius {radius}: {free} free vertices, lambda = {:.4?}", cap.result.eigenvalues);
    }
    Ok(())
}
