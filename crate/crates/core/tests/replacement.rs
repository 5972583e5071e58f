use std::sync::Arc;

use fbvol_core::{
    dirichlet_p_energy, harmonic_replacement, lattice_ball, replacement_gap, GridDomain, ScalarField,
    SolverConfig,
};
use rand::rngs::Xoshiro256PlusPlus;
use rand::{RngExt, SeedableRng};

/// A smooth random field plus nodal noise on a 24×24 square.
fn random_field(rng: &mut Xoshiro256PlusPlus, d: &Arc<GridDomain>) -> ScalarField {
    let modes: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(1.0..4.0),
                rng.random_range(1.0..4.0),
                rng.random_range(0.0..6.3),
            )
        })
        .collect();
    let mut u = ScalarField::from_fn(d.clone(), |x| {
        modes
            .iter()
            .map(|(a, kx, ky, ph)| a * (kx * x[0] + ky * x[1] + ph).sin())
            .sum::<f64>()
            + 2.0
    });
    for v in u.data_mut() {
        *v += rng.random_range(-0.05..0.05);
    }
    u
}

/// Smallest `drop / gap` over `trials` random replacements.
fn worst_ratio(p: f64, trials: usize, seed: u64) -> f64 {
    let d = Arc::new(GridDomain::build_rectangle(24, 24, 1.0 / 24.0).unwrap());
    let h = d.h();
    let cfg = SolverConfig::new(p);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let u = random_field(&mut rng, &d);
        let c = [rng.random_range(0.3..0.7), rng.random_range(0.3..0.7)];
        let r = rng.random_range(3.0 * h..8.0 * h);
        let ball = lattice_ball(&d, c, r);
        let (v, drop) = harmonic_replacement(&u, &ball, &cfg).unwrap();
        let gap = replacement_gap(&u, &v, p).unwrap();
        assert!(gap > 0.0);
        let direct = dirichlet_p_energy(&u, p).unwrap() - dirichlet_p_energy(&v, p).unwrap();
        assert!((direct - drop).abs() <= 1e-9 * (1.0 + drop), "{direct} vs {drop}");
        worst = worst.min(drop / gap);
    }
    worst
}

#[test]
fn replacement_drop_dominates_gap() {
    for (p, seed) in [(1.5, 1), (2.0, 2), (3.0, 3)] {
        let w = worst_ratio(p, 100, seed);
        println!("p = {p}: worst drop/gap = {w:.4e}");
        assert!(w >= 1e-3, "p = {p}: {w}");
    }
}

#[test]
fn quadratic_drop_equals_gap() {
    // for p = 2 the drop is exactly the energy of the difference
    let w = worst_ratio(2.0, 10, 9);
    assert!((w - 1.0).abs() < 1e-6, "{w}");
}
