//! Ornstein–Uhlenbeck semigroup, dilations and exponent bookkeeping.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::math::{exp, expm1, ln, sqrt};
use crate::numerics::{log_gaussian_average, Analytic, GridField, GridShape, QuadratureRule};

/// Relative tolerance on `(q-1)/(p-1) = e^{2s}`.
const RELATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Regime {
    /// `1 < p < q`.
    Forward,
    /// `q < p < 1` with `pq > 0`.
    ReverseSameSign,
    /// `q < 0 < p < 1`.
    ReverseOppositeSign,
}

/// Exponents `p`, `q` linked by the time `s` through `(q-1)/(p-1) = e^{2s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExponentTriple {
    p: f64,
    q: f64,
    s: f64,
}

/// `s = ½ log((q-1)/(p-1))`, the smallest time at which `P_s` maps `L^p` into `L^q`.
pub fn nelson_time(p: f64, q: f64) -> Result<f64> {
    if !(p.is_finite() && q.is_finite()) || p == 1.0 || q == 1.0 {
        return Err(Error::InadmissibleExponent { p, q });
    }
    let ratio = (q - 1.0) / (p - 1.0);
    if !(ratio > 1.0) {
        return Err(Error::InadmissibleExponent { p, q });
    }
    Ok(0.5 * ln(ratio))
}

impl ExponentTriple {
    /// Checks the relation between `p`, `q` and `s`.
    pub fn new(p: f64, q: f64, s: f64) -> Result<Self> {
        let want = nelson_time(p, q)?;
        if !(s > 0.0) || (s - want).abs() > RELATION_TOL * want.max(1.0) {
            return Err(Error::InadmissibleExponent { p, q });
        }
        Self::checked(p, q, s)
    }

    /// Derives `s` from `p` and `q`.
    pub fn from_pq(p: f64, q: f64) -> Result<Self> {
        Self::checked(p, q, nelson_time(p, q)?)
    }

    /// Derives `q` from `p` and `s`.
    pub fn from_ps(p: f64, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(param("time must be positive"));
        }
        let q = 1.0 + (p - 1.0) * exp(2.0 * s);
        Self::checked(p, q, s)
    }

    fn checked(p: f64, q: f64, s: f64) -> Result<Self> {
        if p == 0.0 || q == 0.0 {
            return Err(Error::ExcludedExponent { p });
        }
        Ok(Self { p, q, s })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn regime(&self) -> Regime {
        if self.p > 1.0 {
            Regime::Forward
        } else if self.p * self.q > 0.0 {
            Regime::ReverseSameSign
        } else {
            Regime::ReverseOppositeSign
        }
    }

    /// Hölder conjugate `p' = p/(p-1)`.
    pub fn p_dual(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn q_dual(&self) -> f64 {
        self.q / (self.q - 1.0)
    }
}

/// `1 + (β-1)(q/p)e^{-2s}`, the variance parameter after the flow.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaS {
    pub beta: f64,
    pub triple: ExponentTriple,
    pub value: f64,
}

impl BetaS {
    /// Whether the sharp constants built from this value are defined.
    pub fn admissible(&self) -> bool {
        self.value > 0.0
    }
}

pub fn beta_s(beta: f64, triple: &ExponentTriple) -> Result<BetaS> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(param("beta must be positive"));
    }
    let value = 1.0 + (beta - 1.0) * (triple.q / triple.p) * exp(-2.0 * triple.s);
    Ok(BetaS { beta, triple: *triple, value })
}

/// Decay `e^{-s}` and noise variance `1 - e^{-2s}` of the Mehler kernel.
#[inline]
pub fn mehler(s: f64) -> (f64, f64) {
    (exp(-s), -expm1(-2.0 * s))
}

/// `P_s f(x)` by quadrature over the kernel, with `f` given pointwise.
pub fn ou_at(f: &dyn Fn(&[f64]) -> f64, x: &[f64], s: f64, rule: &QuadratureRule) -> Result<f64> {
    let (d, v) = mehler(s);
    let r = sqrt(v);
    let mut acc = 0.0;
    match x.len() {
        1 => {
            for (y, w) in rule.iter() {
                let z = [d * x[0] + r * y];
                acc += w * f(&z);
            }
        }
        _ => {
            for (y0, w0) in rule.iter() {
                for (y1, w1) in rule.iter() {
                    let z = [d * x[0] + r * y0, d * x[1] + r * y1];
                    acc += w0 * w1 * f(&z);
                }
            }
        }
    }
    if !acc.is_finite() {
        return Err(overflow(x));
    }
    Ok(acc)
}

/// `log P_s f(x)` for positive `f`, given `log f` pointwise; computed with log-sum-exp.
///
/// Nodes follow the peak of the weighted integrand; an integrand whose peak keeps
/// escaping is treated as divergent.
pub fn ou_log_at(log_f: &dyn Fn(&[f64]) -> f64, x: &[f64], s: f64, rule: &QuadratureRule) -> Result<f64> {
    let (d, v) = mehler(s);
    let r = sqrt(v);
    let dim = x.len();
    let shifted = |z: &[f64]| {
        if dim == 1 {
            log_f(&[d * x[0] + r * z[0]])
        } else {
            log_f(&[d * x[0] + r * z[0], d * x[1] + r * z[1]])
        }
    };
    log_gaussian_average(&shifted, dim, rule).ok_or_else(|| overflow(x))
}

fn overflow(x: &[f64]) -> Error {
    Error::Integrability(alloc::format!(
        "Ornstein-Uhlenbeck average overflows at {x:?}; the input grows faster than the kernel decays"
    ))
}

/// `P_s f` on the grid of `f`.
///
/// Log-quadratic inputs go through the closed form. Otherwise each grid value is a
/// quadrature over the kernel and the result keeps an evaluator for off-grid points
/// (computed in the log domain when `f` is positive).
pub fn ou_apply(f: &GridField, s: f64, rule: &QuadratureRule) -> Result<GridField> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(param("time must be non-negative"));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    let shape = *f.shape();
    if let Some(mix) = f.log_quad() {
        let (d, v) = mehler(s);
        return GridField::from_log_quad(shape, mix.kernel_image(d, v)?);
    }
    let src = Arc::new(f.clone());
    let rule = Arc::new(rule.clone());
    let positive = f.values().iter().all(|v| *v > 0.0);
    let analytic = if positive {
        let (src, rule) = (src.clone(), rule.clone());
        Analytic::log_custom(move |x| ou_log_at(&|z| src.log_at(z), x, s, &rule).unwrap_or(f64::NAN))
    } else {
        let (src, rule) = (src.clone(), rule.clone());
        Analytic::custom(move |x| ou_at(&|z| src.value_at(z), x, s, &rule).unwrap_or(f64::NAN))
    };
    GridField::from_analytic(shape, analytic).map_err(|e| match e {
        Error::Evaluation { node } => overflow(&node),
        other => other,
    })
}

/// `T_s f(x) = f(e^{-s} x)`.
pub fn dilation_apply(f: &GridField, s: f64) -> Result<GridField> {
    if !s.is_finite() {
        return Err(param("time must be finite"));
    }
    let shape = *f.shape();
    let k = exp(-s);
    if let Some(mix) = f.log_quad() {
        return GridField::from_log_quad(shape, mix.dilate(k)?);
    }
    match f.analytic() {
        Some(a) => {
            let dim = shape.dim();
            let a = a.clone();
            let scaled = move |x: &[f64]| {
                let mut y = [0.0; 2];
                for i in 0..dim {
                    y[i] = k * x[i];
                }
                (y, dim)
            };
            let analytic = match a {
                Analytic::LogCustom(g) => Analytic::log_custom(move |x| {
                    let (y, d) = scaled(x);
                    g(&y[..d])
                }),
                other => Analytic::custom(move |x| {
                    let (y, d) = scaled(x);
                    other.value_at(&y[..d])
                }),
            };
            GridField::from_analytic(shape, analytic)
        }
        None => {
            let dim = shape.dim();
            let values = (0..shape.len())
                .map(|i| {
                    let p = shape.point(i);
                    f.interpolate(&[k * p[0], k * p[1]][..dim])
                })
                .collect();
            GridField::from_values(shape, values)
        }
    }
}

/// Largest gap between `(P_s f)'` and `e^{-s} P_s[f']` over interior points of a 1-D
/// grid, relative to the largest `|P_s f|` there.
///
/// For fields without an evaluator only points whose kernel stays inside the grid
/// (eight standard deviations) are compared, since the samples say nothing beyond it.
pub fn check_commutation(f: &GridField, s: f64, rule: &QuadratureRule) -> Result<f64> {
    let grid = *f.grid()?;
    let pf = ou_apply(f, s, rule)?;
    let derivative = |x: &[f64]| f.grad_at(x)[0];
    let (decay, var) = mehler(s);
    let reach = 8.0 * sqrt(var);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 2..grid.len() - 2 {
        let x = [grid.point(k)];
        if f.analytic().is_none() && (decay * x[0] - reach < grid.lo() || decay * x[0] + reach > grid.hi()) {
            continue;
        }
        let lhs = pf.grad_at(&x)[0];
        let rhs = decay * ou_at(&derivative, &x, s, rule)?;
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(pf.values()[k].abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Samples of `g ∘ f` on the grid of `f`, keeping an evaluator when `f` has one.
pub fn map_field(f: &GridField, g: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static) -> Result<GridField> {
    let shape = *f.shape();
    match f.analytic() {
        Some(a) => {
            let a = a.clone();
            GridField::from_fn(shape, move |x| g(a.value_at(x)))
        }
        None => GridField::from_values(shape, f.values().iter().map(|v| g(*v)).collect()),
    }
}

/// `f^r` for positive `f`, evaluated through `log f` so that huge ratios stay finite.
pub fn pow_field(f: &GridField, r: f64) -> Result<GridField> {
    let shape = *f.shape();
    if let Some(m) = f.log_quad().and_then(|m| m.powf(r)) {
        return GridField::from_log_quad(shape, m);
    }
    f.log_values()?;
    match f.analytic() {
        Some(a) => {
            let a = a.clone();
            GridField::from_log_fn(shape, move |x| r * a.log_at(x))
        }
        None => {
            let values: Vec<f64> = f.values().iter().map(|v| exp(r * ln(*v))).collect();
            GridField::from_values(shape, values)
        }
    }
}

/// Reference Gaussian weights `exp(-|x|²/2)/(2π)^{n/2}` evaluated on a shape (used in tests
/// and by callers converting between densities and ratios).
pub fn gaussian_values(shape: &GridShape) -> Vec<f64> {
    let dim = shape.dim();
    (0..shape.len())
        .map(|i| {
            let p = shape.point(i);
            let sq: f64 = p[..dim].iter().map(|v| v * v).sum();
            exp(-0.5 * sq - 0.5 * dim as f64 * crate::math::LN_2PI)
        })
        .collect::<Vec<_>>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gauss_hermite_rule, integrate_gaussian, Grid1D, LogQuad, LogQuadMix};
    use alloc::vec;

    fn rule() -> QuadratureRule {
        gauss_hermite_rule(96).unwrap()
    }

    #[test]
    fn nelson_times() {
        assert!((nelson_time(2.0, 4.0).unwrap() - 0.5 * libm::log(3.0)).abs() < 1e-15);
        assert!((nelson_time(1.5, 3.0).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(matches!(nelson_time(2.0, 2.0), Err(Error::InadmissibleExponent { .. })));
        assert!(nelson_time(4.0, 2.0).is_err());
    }

    #[test]
    fn triple_relation_is_enforced() {
        let s = 0.5 * libm::log(3.0);
        assert!(ExponentTriple::new(2.0, 4.0, s).is_ok());
        assert!(ExponentTriple::new(2.0, 4.0, s * (1.0 + 1e-9)).is_err());
        let t = ExponentTriple::from_ps(2.0, s).unwrap();
        assert!((t.q() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn regimes() {
        assert_eq!(ExponentTriple::from_pq(2.0, 4.0).unwrap().regime(), Regime::Forward);
        assert_eq!(ExponentTriple::from_pq(0.5, 0.25).unwrap().regime(), Regime::ReverseSameSign);
        assert_eq!(ExponentTriple::from_pq(-1.0, -3.0).unwrap().regime(), Regime::ReverseSameSign);
        assert_eq!(ExponentTriple::from_pq(0.5, -1.0).unwrap().regime(), Regime::ReverseOppositeSign);
    }

    #[test]
    fn beta_s_values() {
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        assert!((beta_s(1.0, &t).unwrap().value - 1.0).abs() < 1e-15);
        assert!((beta_s(2.0, &t).unwrap().value - 5.0 / 3.0).abs() < 1e-14);
        assert!((beta_s(0.5, &t).unwrap().value - 2.0 / 3.0).abs() < 1e-14);
        let bad = beta_s(0.01, &ExponentTriple::from_pq(-1.0, -3.0).unwrap()).unwrap();
        assert!(!bad.admissible());
    }

    #[test]
    fn markov_property_and_exponential() {
        let s = 0.37;
        let one = GridField::from_fn(GridShape::desk_line(), |_| 1.0).unwrap();
        let p1 = ou_apply(&one, s, &rule()).unwrap();
        assert!(p1.values().iter().all(|v| (v - 1.0).abs() < 1e-13));

        let a = 0.8;
        let e = GridField::from_fn(GridShape::desk_line(), move |x| libm::exp(a * x[0])).unwrap();
        let pe = ou_apply(&e, s, &rule()).unwrap();
        let (d, v) = mehler(s);
        for k in (0..4097).step_by(128) {
            let x = pe.shape().point(k)[0];
            let want = libm::exp(a * d * x + 0.5 * a * a * v);
            assert!((pe.values()[k] - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn gaussian_ratio_image_matches_completed_square() {
        // f = γ_2/γ = exp(x²/4)/sqrt(2): P_s f computed by quadrature vs the closed form
        let s = 0.5 * libm::log(3.0);
        let f = GridField::from_log_fn(GridShape::desk_line(), |x| 0.25 * x[0] * x[0] - 0.5 * libm::log(2.0)).unwrap();
        let pf = ou_apply(&f, s, &rule()).unwrap();
        let (d, v) = mehler(s);
        // E exp(c (dx + sqrt(v) Y)^2) = exp(c d² x² / (1 - 2cv)) / sqrt(1 - 2cv)
        let c = 0.25;
        for k in (0..4097).step_by(64) {
            let x = pf.shape().point(k)[0];
            let want =
                libm::exp(c * d * d * x * x / (1.0 - 2.0 * c * v)) / libm::sqrt(1.0 - 2.0 * c * v) / libm::sqrt(2.0);
            assert!((pf.values()[k] - want).abs() <= 1e-8 * want, "x={x}");
        }
        // the closed-form path agrees too
        let lq = LogQuadMix::single(LogQuad::quadratic_1d(0.25, 0.0, -0.5 * libm::log(2.0)).unwrap());
        let g = GridField::from_log_quad(GridShape::desk_line(), lq).unwrap();
        let pg = ou_apply(&g, s, &rule()).unwrap();
        for (a, b) in pg.values().iter().zip(pf.values()) {
            assert!((a - b).abs() <= 1e-8 * b);
        }
    }

    #[test]
    fn overflow_is_an_integrability_error() {
        let f = GridField::from_log_fn(GridShape::desk_line(), |x| 3.0 * x[0] * x[0]).unwrap();
        assert!(matches!(ou_apply(&f, 0.3, &rule()), Err(Error::Integrability(_))));
        let q = GridField::from_log_quad(
            GridShape::desk_line(),
            LogQuadMix::single(LogQuad::quadratic_1d(2.0, 0.0, 0.0).unwrap()),
        )
        .unwrap();
        assert!(matches!(ou_apply(&q, 0.3, &rule()), Err(Error::Integrability(_))));
    }

    #[test]
    fn dilations() {
        let f = GridField::from_fn(GridShape::desk_line(), |x| x[0] * x[0]).unwrap();
        let same = dilation_apply(&f, 0.0).unwrap();
        assert_eq!(same.values(), f.values());
        let quarter = dilation_apply(&f, core::f64::consts::LN_2).unwrap();
        for (k, v) in quarter.values().iter().enumerate() {
            let x = quarter.shape().point(k)[0];
            assert!((v - x * x / 4.0).abs() < 1e-12 * (1.0 + x * x));
        }
        let s = 0.4;
        let b = GridField::from_fn(GridShape::square(-3.0, 3.0, 31).unwrap(), |x| libm::exp(x[0] * x[1])).unwrap();
        let db = dilation_apply(&b, s).unwrap();
        for (k, v) in db.values().iter().enumerate() {
            let p = db.shape().point(k);
            let want = libm::exp(libm::exp(-2.0 * s) * p[0] * p[1]);
            assert!((v - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn commutation_residuals() {
        let r = rule();
        let e = GridField::from_fn(GridShape::desk_line(), |x| libm::exp(0.5 * x[0])).unwrap();
        assert!(check_commutation(&e, 0.3, &r).unwrap() < 1e-7);
        let cube = GridField::from_fn(GridShape::desk_line(), |x| x[0] * x[0] * x[0]).unwrap();
        assert!(check_commutation(&cube, 0.3, &r).unwrap() < 1e-6);
        let one = GridField::from_fn(GridShape::desk_line(), |_| 1.0).unwrap();
        assert!(check_commutation(&one, 0.3, &r).unwrap() < 1e-12);
    }

    #[test]
    fn commutation_converges_on_sampled_inputs() {
        let r = gauss_hermite_rule(32).unwrap();
        let res = |n: usize| {
            let s = GridShape::Line(Grid1D::new(-10.0, 10.0, n).unwrap());
            let f = GridField::from_fn(s, |x| libm::sin(x[0]) + 0.2 * x[0] * x[0]).unwrap().sampled_only();
            check_commutation(&f, 0.5, &r).unwrap()
        };
        let (a, b) = (res(201), res(401));
        assert!(a / b >= 3.5, "coarse {a} fine {b}");
    }

    #[test]
    fn mass_is_preserved() {
        let r = rule();
        let mix = LogQuadMix::gaussian_mixture(1, &[vec![-1.0], vec![2.0]], &[0.3, 0.7], 0.8).unwrap();
        let f = GridField::from_log_quad(GridShape::desk_line(), mix).unwrap().sampled_only();
        let pf = ou_apply(&f, 0.6, &r).unwrap();
        let before = integrate_gaussian(|x| f.value_at(&[x]), 1.0, &r).unwrap();
        let after = integrate_gaussian(|x| pf.value_at(&[x]), 1.0, &r).unwrap();
        assert!((before - after).abs() < 1e-8);
    }
}
