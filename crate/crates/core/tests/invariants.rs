use std::f64::consts::PI;

use extremal::conformal::{mass_partition, mobius_pullback_density, BubbleSpec, bubble_family, Density, MobiusMap};
use extremal::mesh::build_icosphere;
use extremal::spectrum::{assemble_mass, assemble_stiffness, dense_oracle, lowest_eigenpairs};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lambda_area(mesh: &extremal::mesh::TriMesh, d: &Density, k: usize) -> f64 {
    let res = lowest_eigenpairs(&assemble_stiffness(mesh).unwrap(), &assemble_mass(mesh, d).unwrap(), k + 1, 1e-10).unwrap();
    res.eigenvalues[k] * mesh.total_area(d).unwrap()
}

#[test]
fn round_value_is_mobius_invariant() {
    let mesh = build_icosphere(5).unwrap();
    let maps = [
        MobiusMap::dilation(1.5).unwrap(),
        MobiusMap::dilation(2.0).unwrap(),
        MobiusMap::new(Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.2), Complex64::new(1.0, 0.0)).unwrap(),
    ];
    for map in &maps {
        let d = mobius_pullback_density(&mesh, map).unwrap();
        for k in 1..=3 {
            let v = lambda_area(&mesh, &d, k) / (8.0 * PI);
            assert!((v - 1.0).abs() <= 0.02, "lambda_{k} A / 8 pi = {v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_area_is_scale_invariant(seed in any::<u64>(), s in 0.01f64..100.0) {
        let mesh = build_icosphere(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..mesh.num_vertices())
            .map(|_| rng.gen_range(0.2..4.2))
            .collect();
        let d = Density::from_values(vals).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let a = dense_oracle(&k, &assemble_mass(&mesh, &d).unwrap(), 8).unwrap();
        let b = dense_oracle(&k, &assemble_mass(&mesh, &d.scaled(s)).unwrap(), 8).unwrap();
        let (area_a, area_b) = (mesh.total_area(&d).unwrap(), mesh.total_area(&d.scaled(s)).unwrap());
        prop_assert!(a.eigenvalues[0].abs() < 1e-9 * a.eigenvalues[1]);
        for j in 1..8 {
            let (x, y) = (a.eigenvalues[j] * area_a, b.eigenvalues[j] * area_b);
            prop_assert!((x - y).abs() <= 1e-9 * x, "{} vs {}", x, y);
            prop_assert!(a.eigenvalues[j] >= a.eigenvalues[j - 1]);
        }
    }

    #[test]
    fn partition_fractions_sum_to_one(m in 2usize..=4, eps in 0.02f64..0.2, w in 0.2f64..1.0) {
        let mesh = build_icosphere(3).unwrap();
        let spec = BubbleSpec::symmetric(m, eps).unwrap();
        let d = bubble_family(&mesh, &spec).unwrap();
        let r = w * spec.cap_radius();
        let part = mass_partition(&mesh, &d, spec.centers(), r).unwrap();
        prop_assert!(part.fractions.iter().all(|f| *f >= 0.0));
        prop_assert!(part.regular >= -1e-12);
        prop_assert!((part.fractions.iter().sum::<f64>() + part.regular - 1.0).abs() < 1e-12);
    }
}
