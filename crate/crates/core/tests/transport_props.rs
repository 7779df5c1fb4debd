use gauss_deficit_core::functionals::relative_entropy_fisher;
use gauss_deficit_core::generators::{fp_random, log_concave_random, talagrand_admissible};
use gauss_deficit_core::numerics::{gauss_hermite_rule, Grid1D, GridField, GridShape, LogQuadMix};
use gauss_deficit_core::transport::{brenier_1d, talagrand_deficit, w2, DensitySpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> Grid1D {
    Grid1D::desk()
}

fn gaussian(mean: f64, var: f64) -> DensitySpec {
    DensitySpec::gaussian(grid(), mean, var).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn monge_ampere_and_push_forward(m1 in -1.0f64..1.0, v1 in 0.3f64..3.0, m2 in -1.0f64..1.0, v2 in 0.3f64..3.0) {
        let (mu, nu) = (gaussian(m1, v1), gaussian(m2, v2));
        let map = brenier_1d(&mu, &nu).unwrap();
        prop_assert!(map.ma_residual <= 1e-4, "{}", map.ma_residual);
        for h in [|x: f64| x, |x: f64| x * x, |x: f64| x.abs()] {
            let pushed = map.push_forward(h);
            let want = nu.expect(h);
            prop_assert!((pushed - want).abs() < 1e-5, "{} vs {}", pushed, want);
        }
    }

    #[test]
    fn w2_triangle_inequality(
        a in (-1.0f64..1.0, 0.3f64..3.0),
        b in (-1.0f64..1.0, 0.3f64..3.0),
        c in (-1.0f64..1.0, 0.3f64..3.0),
    ) {
        let (x, y, z) = (gaussian(a.0, a.1), gaussian(b.0, b.1), gaussian(c.0, c.1));
        let (xy, yz, xz) = (w2(&x, &y).unwrap(), w2(&y, &z).unwrap(), w2(&x, &z).unwrap());
        prop_assert!(xz <= xy + yz + 1e-6);
        // closed form for Gaussians
        let exact = ((a.0 - c.0).powi(2) + (a.1.sqrt() - c.1.sqrt()).powi(2)).sqrt();
        prop_assert!((xz - exact).abs() < 1e-6, "{} vs {}", xz, exact);
    }
}

fn classical_talagrand_holds(v: GridField) -> Result<(), TestCaseError> {
    let rule = gauss_hermite_rule(96).unwrap();
    let spec = DensitySpec::normalized(v.clone()).unwrap();
    let cost = w2(&gaussian(0.0, 1.0), &spec).unwrap().powi(2);
    let ent = relative_entropy_fisher(spec.field(), &rule).unwrap().entropy;
    prop_assert!(0.5 * cost <= ent + 1e-5, "{} > {}", 0.5 * cost, ent);
    let r = talagrand_deficit(&spec, 1.0, &rule).unwrap();
    prop_assert!(r.hypotheses_pass() && r.slack >= -1e-5);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn classical_talagrand_on_mixtures(
        means in proptest::collection::vec(-3.0f64..3.0, 1..4),
        var in 0.3f64..2.5,
    ) {
        let weights = vec![1.0; means.len()];
        let pts: Vec<Vec<f64>> = means.iter().map(|m| vec![*m]).collect();
        let mix = LogQuadMix::gaussian_mixture(1, &pts, &weights, var).unwrap();
        classical_talagrand_holds(GridField::from_log_quad(GridShape::desk_line(), mix).unwrap())?;
    }

    #[test]
    fn classical_talagrand_on_generated_inputs(seed in any::<u64>(), beta in 0.3f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = GridShape::desk_line();
        classical_talagrand_holds(fp_random(&mut rng, beta, &shape, &gauss_hermite_rule(64).unwrap()).unwrap())?;
        classical_talagrand_holds(log_concave_random(&mut rng, beta.min(1.0), shape).unwrap())?;
        classical_talagrand_holds(talagrand_admissible(&mut rng, 1.0 + beta).field(shape).unwrap())?;
    }
}
