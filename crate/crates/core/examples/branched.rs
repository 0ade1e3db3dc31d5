//! Pullback of the round metric by `z -> z^3`: a branched cover with two
//! critical points of multiplicity 2 and area `3 * 4 pi`. Its first nonzero
//! eigenvalue 2 appears with multiplicity at least 3.

use extremal::conformal::{critical_points, rational_pullback_density, ChartPoint, RationalMap};
use extremal::mesh::build_icosphere;
use extremal::spectrum::{assemble_mass, assemble_stiffness, lowest_eigenpairs};

fn main() -> extremal::Result<()> {
    let map = RationalMap::from_pairs(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0)])?;
    for c in critical_points(&map)? {
        let at = match c.location {
            ChartPoint::Finite(z) => format!("{z:.4}"),
            ChartPoint::Infinity => "infinity".to_string(),
        };
        println!("critical point {at} with multiplicity {}", c.multiplicity);
    }

    let mesh = build_icosphere(5)?;
    let density = rational_pullback_density(&mesh, &map)?;
    println!("area {:.4} (exact {:.4})", mesh.total_area(&density)?, 12.0 * std::f64::consts::PI);
    let result = lowest_eigenpairs(&assemble_stiffness(&mesh)?, &assemble_mass(&mesh, &density)?, 20, 1e-9)?;
    for (i, l) in result.eigenvalues.iter().enumerate().take(12) {
        println!("lambda_{i} = {l:.5}");
    }
    Ok(())
}
