use gauss_deficit_core::generators::lipschitz_random;
use gauss_deficit_core::hamilton_jacobi::{dual_talagrand_check, hopf_lax, HJField};
use gauss_deficit_core::numerics::Grid1D;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> Grid1D {
    Grid1D::new(-12.0, 12.0, 2049).unwrap()
}

#[test]
fn classical_dual_form_on_lipschitz_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..50 {
        let s = lipschitz_random(&mut rng, 1.5);
        let f = HJField::from_fn(grid(), move |x| s.value(x)).unwrap();
        let r = dual_talagrand_check(&f, 1.0, 1.0).unwrap();
        assert!((r.sharp_constant - 1.0).abs() < 1e-15);
        assert!(r.hypotheses_pass() && r.slack >= -1e-4, "input {k}: {}", r.slack);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hopf_lax_never_exceeds_the_data(seed in any::<u64>(), lip in 0.1f64..3.0, tau in 0.05f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = lipschitz_random(&mut rng, lip);
        let f = HJField::from_fn(grid(), move |x| s.value(x)).unwrap();
        let q = hopf_lax(&f, tau).unwrap();
        for (a, b) in q.values().iter().zip(f.field().values()) {
            prop_assert!(*a <= *b + 1e-14);
        }
    }

    #[test]
    fn semigroup_law_on_convex_data(
        curv in 0.05f64..1.0,
        shift in -2.0f64..2.0,
        weight in 0.0f64..2.0,
        sigma in 0.1f64..1.5,
        tau in 0.1f64..1.5,
    ) {
        let f = HJField::from_fn(grid(), move |x| 0.5 * curv * x * x + weight * ((x - shift).cosh()).ln()).unwrap();
        let two = hopf_lax(&HJField::new(hopf_lax(&f, tau).unwrap()).unwrap(), sigma).unwrap();
        let one = hopf_lax(&f, sigma + tau).unwrap();
        let g = grid();
        let tol = 2.0 * g.spacing() * g.spacing() / tau;
        for i in (0..g.len()).filter(|i| g.point(*i).abs() <= 6.0) {
            prop_assert!((two.values()[i] - one.values()[i]).abs() <= tol, "x={}", g.point(i));
        }
    }
}
