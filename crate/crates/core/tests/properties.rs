use std::sync::Arc;

use fbvol_core::{
    dirichlet_p_energy, penalty, positivity_measure, total_energy, truncate_negative, GridDomain,
    PenaltyParams, ScalarField,
};
use proptest::prelude::*;

fn square() -> Arc<GridDomain> {
    Arc::new(GridDomain::build_rectangle(9, 9, 0.125).unwrap())
}

fn field(values: Vec<f64>) -> ScalarField {
    ScalarField::from_data(square(), values).unwrap()
}

proptest! {
    #[test]
    fn energy_scales_like_c_to_the_p(
        values in prop::collection::vec(-2.0f64..2.0, 81),
        c in 0.1f64..5.0,
        p in 1.2f64..4.0,
    ) {
        let u = field(values);
        let e = dirichlet_p_energy(&u, p).unwrap();
        let ec = dirichlet_p_energy(&u.scaled(c), p).unwrap();
        prop_assert!((ec - c.powf(p) * e).abs() <= 1e-10 * (1.0 + ec.abs()));
    }

    #[test]
    fn positivity_is_scale_invariant_and_monotone(
        values in prop::collection::vec(-1.0f64..1.0, 81),
        bump in prop::collection::vec(0.0f64..1.0, 81),
        c in 0.01f64..100.0,
    ) {
        let u = field(values.clone());
        prop_assert_eq!(positivity_measure(&u), positivity_measure(&u.scaled(c)));
        let w = field(values.iter().zip(&bump).map(|(a, b)| a + b).collect());
        prop_assert!(positivity_measure(&w) >= positivity_measure(&u));
        prop_assert!(positivity_measure(&u) <= u.domain().area());
    }

    #[test]
    fn truncation_never_raises_the_functional(
        values in prop::collection::vec(-1.0f64..1.0, 81),
        p in 1.2f64..4.0,
        eps in 0.01f64..1.0,
        alpha in 0.05f64..0.9,
    ) {
        let u = field(values);
        let params = PenaltyParams::new(eps, alpha).unwrap();
        let before = total_energy(&u, p, &params).unwrap();
        let after = total_energy(&truncate_negative(&u), p, &params).unwrap();
        prop_assert!(after.dirichlet <= before.dirichlet * (1.0 + 1e-12));
        prop_assert_eq!(after.positivity, before.positivity);
    }

    #[test]
    fn penalty_is_convex_for_small_epsilon(
        eps in 0.01f64..1.0,
        alpha in 0.01f64..2.0,
        a in 0.0f64..4.0,
        b in 0.0f64..4.0,
        t in 0.0f64..1.0,
    ) {
        let pp = PenaltyParams::new(eps, alpha).unwrap();
        let m = t * a + (1.0 - t) * b;
        let chord = t * penalty(a, &pp) + (1.0 - t) * penalty(b, &pp);
        prop_assert!(penalty(m, &pp) <= chord + 1e-12 * (1.0 + chord.abs()));
    }
}

#[test]
fn annulus_mask_has_the_square_symmetries() {
    for (inner, outer, h) in [(1.0, 2.0, 2.0 / 63.0), (0.5, 1.5, 0.1), (1.0, 2.0, 0.25)] {
        let d = GridDomain::build_annulus(inner, outer, h).unwrap();
        let (nx, ny) = (d.nx(), d.ny());
        assert_eq!(nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                let k = d.kind(d.index(i, j));
                assert_eq!(k, d.kind(d.index(nx - 1 - i, j)));
                assert_eq!(k, d.kind(d.index(i, ny - 1 - j)));
                assert_eq!(k, d.kind(d.index(j, i)));
            }
        }
    }
}
