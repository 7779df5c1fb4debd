use gauss_deficit_core::numerics::{
    gauss_hermite_rule, integrate_gaussian, integrate_lebesgue, log_derivatives, Grid1D, GridField, GridShape,
};
use proptest::prelude::*;

/// `E[x^k]` under the standard Gaussian.
fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    (1..k).step_by(2).map(|j| j as f64).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauss_hermite_is_exact_on_polynomials(
        m in 2usize..24,
        coeffs in proptest::collection::vec(-1.0f64..1.0, 48),
    ) {
        let rule = gauss_hermite_rule(m).unwrap();
        let degree = 2 * m - 1;
        let c = &coeffs[..=degree];
        let poly = |x: f64| c.iter().rev().fold(0.0, |acc, a| acc * x + a);
        let got: f64 = rule.iter().map(|(x, w)| w * poly(x)).sum();
        let want: f64 = c.iter().enumerate().map(|(k, a)| a * gaussian_moment(k)).sum();
        let scale: f64 = c.iter().enumerate().map(|(k, a)| (a * gaussian_moment(k + k % 2)).abs()).sum();
        prop_assert!((got - want).abs() <= 1e-12 * scale.max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn gaussian_and_lebesgue_integrals_agree(
        beta in 0.25f64..4.0,
        amp in 0.0f64..0.9,
        freq in 0.1f64..2.0,
        phase in 0.0f64..std::f64::consts::TAU,
    ) {
        let rule = gauss_hermite_rule(96).unwrap();
        let f = move |x: f64| 1.0 + amp * (freq * x + phase).cos();
        let via_nodes = integrate_gaussian(f, beta, &rule).unwrap();
        let weighted = GridField::from_fn(GridShape::Line(Grid1D::new(-30.0, 30.0, 4097).unwrap()), move |x| {
            f(x[0]) * (-0.5 * x[0] * x[0] / beta).exp() / (2.0 * std::f64::consts::PI * beta).sqrt()
        })
        .unwrap();
        let via_grid = integrate_lebesgue(&weighted).unwrap();
        prop_assert!((via_nodes - via_grid).abs() < 1e-8, "{} vs {}", via_nodes, via_grid);
    }

    #[test]
    fn log_hessian_error_is_second_order(var in 0.3f64..3.0, n in 200usize..600) {
        let err = |points: usize| {
            let shape = GridShape::Line(Grid1D::new(-6.0, 6.0, points).unwrap());
            // sampled values only, so the derivatives come from differences
            let mix = GridField::from_log_fn(shape, move |x| {
                let a = -0.5 * (x[0] - 0.7).powi(2) / var;
                let b = -0.5 * (x[0] + 0.9).powi(2) / var;
                a.max(b) + (1.0 + (-(a - b).abs()).exp()).ln()
            })
            .unwrap();
            let d = log_derivatives(&mix.sampled_only()).unwrap();
            let g = shape.axis(0);
            (2..points - 2)
                .map(|k| (d.hess[0].values()[k] - mix.hess_log_at(&[g.point(k)])[0][0]).abs())
                .fold(0.0, f64::max)
        };
        let coarse = err(n);
        let fine = err(2 * n - 1);
        prop_assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
    }
}
