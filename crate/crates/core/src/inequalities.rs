//! Deficit checkers: regularised hypercontractivity (forward and reverse), log-Sobolev,
//! covariance-eigenvalue and matrix-parameter variants, Poincaré, Beckner and the dual
//! Brascamp–Lieb form, together with the two counterexamples.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::flows::{certify, covariance, log_hessians, CertificateKind, ConvexityCertificate, EDGE_EXCLUSION};
use crate::functionals::{
    beckner_b, bl_h, dn, hc_ratio, l2_weighted, log_hc_moment, log_moment, lsi_gauss, relative_entropy_fisher,
    talagrand_gauss,
};
use crate::math::{exp, expm1, ln, log_sum_exp, powf, LN_2PI};
use crate::numerics::{sym_eigenvalues, GridField, GridShape, LogQuad, LogQuadMix, Mat2, QuadratureRule};
use crate::semigroups::{mehler, ou_at, ExponentTriple, Regime};
use crate::transport::triangular_cost;

pub use crate::report::{DeficitReport, Hypothesis, Sense};

/// Slack tolerance for one-dimensional quadrature-backed checks.
pub const SLACK_TOL: f64 = 1e-5;
/// Slack tolerance for checks backed by planar grids.
pub const SLACK_TOL_2D: f64 = 1e-4;

fn log_std_gaussian(x: &[f64]) -> f64 {
    let sq: f64 = x.iter().map(|v| v * v).sum();
    -0.5 * sq - 0.5 * x.len() as f64 * LN_2PI
}

/// `∫ g dγ` on tensor Gauss–Hermite nodes.
fn gauss_expect(dim: usize, rule: &QuadratureRule, mut g: impl FnMut(&[f64]) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    if dim == 1 {
        for (x, w) in rule.iter() {
            acc += w * g(&[x]);
        }
    } else {
        for (x, wx) in rule.iter() {
            for (y, wy) in rule.iter() {
                acc += wx * wy * g(&[x, y]);
            }
        }
    }
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(Error::Integrability("Gaussian expectation is not finite".into()))
    }
}

/// Certificate required by the main theorems: subharmonic above `β = 1`, concave below,
/// none at `β = 1`.
fn regime_certificate(v: &GridField, beta: f64) -> Result<Option<(&'static str, ConvexityCertificate)>> {
    Ok(if beta > 1.0 {
        Some(("semi-log-subharmonic", certify(v, CertificateKind::Subharmonic, beta, None)?))
    } else if beta < 1.0 {
        Some(("semi-log-concave", certify(v, CertificateKind::Concave, beta, None)?))
    } else {
        None
    })
}

fn with_certificate(report: DeficitReport, cert: Option<(&'static str, ConvexityCertificate)>) -> DeficitReport {
    match cert {
        Some((name, c)) => report.hypothesis(name, c.passed, c.margin),
        None => report,
    }
}

/// The checkable integrability proxy, recorded as a hypothesis.
fn with_integrability(report: DeficitReport, v: &GridField, beta: f64) -> DeficitReport {
    match l2_weighted(v, beta) {
        Ok(_) => report.hypothesis("l2-weighted", true, 0.0),
        Err(_) => report.hypothesis("l2-weighted", false, -1.0),
    }
}

/// `∫ v/γ dγ = ∫ v dx`.
fn gaussian_mass(v: &GridField, rule: &QuadratureRule) -> Result<f64> {
    Ok(exp(log_moment(&|x| v.log_at(x) - log_std_gaussian(x), v.dim(), 1.0, rule)?))
}

/// `‖P_s[(v/γ)^{1/p}]‖_{L^q(γ)}`.
fn hc_norm(v: &GridField, triple: &ExponentTriple, rule: &QuadratureRule) -> Result<f64> {
    Ok(exp(log_hc_moment(&|x| v.log_at(x), v.dim(), triple, rule)? / triple.q()))
}

fn triple_params(report: DeficitReport, beta: f64, triple: &ExponentTriple) -> DeficitReport {
    report.param("beta", beta).param("p", triple.p()).param("q", triple.q()).param("s", triple.s())
}

/// Forward regularised hypercontractivity `‖P_s[(v/γ)^{1/p}]‖_q ≤ hc_ratio · (∫ v/γ dγ)^{1/p}`.
pub fn hc_check(v: &GridField, beta: f64, triple: &ExponentTriple, rule: &QuadratureRule) -> Result<DeficitReport> {
    if triple.regime() != Regime::Forward {
        return Err(param("forward hypercontractivity needs 1 < p < q"));
    }
    v.log_values()?;
    let constant = hc_ratio(v.dim(), beta, triple)?;
    let mass = gaussian_mass(v, rule)?;
    let lhs = hc_norm(v, triple, rule)?;
    let rhs = constant * powf(mass, 1.0 / triple.p());
    let report =
        triple_params(DeficitReport::new("hc", lhs, rhs, constant, Sense::AtMost), beta, triple).param("mass", mass);
    let report = with_certificate(report, regime_certificate(v, beta)?);
    Ok(with_integrability(report, v, beta))
}

/// Reverse regularised hypercontractivity, `lhs ≥ rhs`, for `q < p < 1`.
///
/// Same-sign exponents need `β > 1` with a subharmonic input, opposite signs `β < 1`
/// with a concave input; `β = 1` is the classical statement.
pub fn reverse_hc_check(
    v: &GridField,
    beta: f64,
    triple: &ExponentTriple,
    rule: &QuadratureRule,
) -> Result<DeficitReport> {
    let p = triple.p();
    let threshold = -expm1(-2.0 * triple.s());
    if p == 0.0 || (p - threshold).abs() <= 1e-12 * threshold.max(1.0) {
        return Err(Error::ExcludedExponent { p });
    }
    let regime = triple.regime();
    if regime == Regime::Forward {
        return Err(param("reverse hypercontractivity needs q < p < 1"));
    }
    v.log_values()?;
    let constant = hc_ratio(v.dim(), beta, triple)?;
    let mass = gaussian_mass(v, rule)?;
    let lhs = hc_norm(v, triple, rule)?;
    let rhs = constant * powf(mass, 1.0 / p);
    let mut report = triple_params(DeficitReport::new("reverse-hc", lhs, rhs, constant, Sense::AtLeast), beta, triple)
        .param("mass", mass);
    if beta != 1.0 {
        let (kind, name, matches) = match regime {
            Regime::ReverseSameSign => (CertificateKind::Subharmonic, "semi-log-subharmonic", beta > 1.0),
            _ => (CertificateKind::Concave, "semi-log-concave", beta < 1.0),
        };
        let c = certify(v, kind, beta, None)?;
        report =
            report.hypothesis("regime", matches, if matches { 0.0 } else { -1.0 }).hypothesis(name, c.passed, c.margin);
    }
    Ok(with_integrability(report, v, beta))
}

fn check_normalized(mass: f64) -> Result<()> {
    if (mass - 1.0).abs() > crate::flows::NORMALIZATION_TOL {
        return Err(Error::Normalization { mass });
    }
    Ok(())
}

/// `Ent_γ(v/γ) - ½ I_γ(v/γ) ≤ lsi_gauss(β)` for a normalized density `v`.
pub fn lsi_check(v: &GridField, beta: f64, rule: &QuadratureRule) -> Result<DeficitReport> {
    let constant = lsi_gauss(v.dim(), beta)?;
    let ef = relative_entropy_fisher(v, rule)?;
    check_normalized(ef.mass)?;
    let report = DeficitReport::new("lsi", ef.lsi_gap(), constant, constant, Sense::AtMost)
        .param("beta", beta)
        .param("entropy", ef.entropy)
        .param("fisher", ef.fisher);
    let report = with_certificate(report, regime_certificate(v, beta)?);
    Ok(with_integrability(report, v, beta))
}

fn eigenvalues(m: &Mat2, dim: usize) -> Vec<f64> {
    if dim == 1 {
        alloc::vec![m[0][0]]
    } else {
        let (a, b) = sym_eigenvalues(m);
        alloc::vec![a, b]
    }
}

/// `Ent ≤ ½ I - ½ Σ_{β_i ≤ 1}(log β_i - 1 + 1/β_i)` with `β_i` the covariance eigenvalues.
pub fn els_eigen_check(v: &GridField, rule: &QuadratureRule) -> Result<DeficitReport> {
    let dim = v.dim();
    let cov = covariance(v)?;
    let eig = eigenvalues(&cov, dim);
    let correction: f64 = eig.iter().filter(|b| **b <= 1.0).map(|b| lsi_gauss(1, *b)).sum::<Result<f64>>()?;
    let ef = relative_entropy_fisher(v, rule)?;
    let rhs = 0.5 * ef.fisher + correction;
    let mut report = DeficitReport::new("els-eigen", ef.entropy, rhs, correction, Sense::AtMost)
        .param("entropy", ef.entropy)
        .param("fisher", ef.fisher);
    for (i, b) in eig.iter().enumerate() {
        report = report.param(alloc::format!("cov_eigenvalue_{i}"), *b);
    }
    Ok(report)
}

/// Which inequality of the matrix-parameter family to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum MatrixInequality {
    Hc,
    Lsi,
    Talagrand,
}

/// Side of the two-sided log-Hessian hypothesis `∇² log v ≥ -B^{-1}` or `≤ -B^{-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum MatrixSide {
    Convex,
    Concave,
}

/// Smallest eigenvalue over interior points of `∇² log v + B^{-1}` (convex) or of
/// `-B^{-1} - ∇² log v` (concave).
pub fn matrix_certificate_margin(v: &GridField, b: [f64; 2], side: MatrixSide) -> Result<f64> {
    let shape = *v.shape();
    let mut margin = f64::INFINITY;
    for (i, h) in log_hessians(v)?.iter().enumerate() {
        if !shape.is_interior(i, EDGE_EXCLUSION) {
            continue;
        }
        let m = match side {
            MatrixSide::Convex => [[h[0][0] + 1.0 / b[0], h[0][1]], [h[1][0], h[1][1] + 1.0 / b[1]]],
            MatrixSide::Concave => [[-1.0 / b[0] - h[0][0], -h[0][1]], [-h[1][0], -1.0 / b[1] - h[1][1]]],
        };
        margin = margin.min(sym_eigenvalues(&m).0);
    }
    Ok(margin)
}

/// Planar checks with parameter `B = diag(b)`: products or sums run over `β_i ≥ 1`
/// on the convex side and over `β_i ≤ 1` on the concave side.
pub fn matrix_check(
    v: &GridField,
    b: [f64; 2],
    triple: Option<&ExponentTriple>,
    which: MatrixInequality,
    side: MatrixSide,
    rule: &QuadratureRule,
) -> Result<DeficitReport> {
    if v.dim() != 2 {
        return Err(param("matrix checks need a planar density"));
    }
    if !(b[0] > 0.0 && b[1] > 0.0) {
        return Err(param("B must be positive definite"));
    }
    let counted: Vec<f64> = b
        .iter()
        .copied()
        .filter(|x| match side {
            MatrixSide::Convex => *x >= 1.0,
            MatrixSide::Concave => *x <= 1.0,
        })
        .collect();
    let tol = 1e-4 / b[0].min(b[1]);
    let margin = matrix_certificate_margin(v, b, side)?;
    let side_name = match side {
        MatrixSide::Convex => "matrix-semi-log-convex",
        MatrixSide::Concave => "matrix-semi-log-concave",
    };
    let mut report = match which {
        MatrixInequality::Hc => {
            let triple = triple.ok_or_else(|| param("hypercontractivity needs exponents"))?;
            if triple.regime() != Regime::Forward {
                return Err(param("matrix hypercontractivity needs 1 < p < q"));
            }
            let constant = counted.iter().map(|x| hc_ratio(1, *x, triple)).product::<Result<f64>>()?;
            let mass = gaussian_mass(v, rule)?;
            let lhs = hc_norm(v, triple, rule)?;
            let rhs = constant * powf(mass, 1.0 / triple.p());
            DeficitReport::new("matrix-hc", lhs, rhs, constant, Sense::AtMost)
                .param("p", triple.p())
                .param("q", triple.q())
                .param("mass", mass)
        }
        MatrixInequality::Lsi => {
            let constant = counted.iter().map(|x| lsi_gauss(1, *x)).sum::<Result<f64>>()?;
            let ef = relative_entropy_fisher(v, rule)?;
            check_normalized(ef.mass)?;
            DeficitReport::new("matrix-lsi", ef.lsi_gap(), constant, constant, Sense::AtMost)
                .param("entropy", ef.entropy)
                .param("fisher", ef.fisher)
        }
        MatrixInequality::Talagrand => {
            let constant = counted.iter().map(|x| talagrand_gauss(1, *x)).sum::<Result<f64>>()?;
            let cost = triangular_cost(v)?;
            let ent = relative_entropy_fisher(v, rule)?.entropy;
            let mut r =
                DeficitReport::new("matrix-talagrand", 0.5 * cost.total() - ent, constant, constant, Sense::AtMost)
                    .param("w2_squared_bound", cost.total())
                    .param("entropy", ent);
            if side == MatrixSide::Convex {
                let upper = certify(v, CertificateKind::Concave, f64::INFINITY, None)?;
                r = r.hypothesis("log-concave", upper.passed, upper.margin);
            }
            r
        }
    };
    report = report.hypothesis(side_name, margin >= -tol, margin).param("b1", b[0]).param("b2", b[1]);
    Ok(report)
}

/// Density `γ |f|^r` on the grid of `f`, keeping an evaluator when `f` has one.
fn gaussian_weighted_power(f: &GridField, r: f64) -> Result<GridField> {
    let shape = *f.shape();
    match f.analytic() {
        Some(_) => {
            let f = f.clone();
            GridField::from_log_fn(shape, move |x| r * ln(f.value_at(x).abs()) + log_std_gaussian(x))
        }
        None => {
            let dim = shape.dim();
            let values = (0..shape.len())
                .map(|i| {
                    let x = shape.point(i);
                    powf(f.values()[i].abs(), r) * exp(log_std_gaussian(&x[..dim]))
                })
                .collect();
            GridField::from_values(shape, values)
        }
    }
}

fn dirichlet_energy(f: &GridField, rule: &QuadratureRule) -> Result<f64> {
    let dim = f.dim();
    gauss_expect(dim, rule, |x| {
        let g = f.grad_at(x);
        g[0] * g[0] + if dim > 1 { g[1] * g[1] } else { 0.0 }
    })
}

/// `½(1 + D_n(β))∫ f² dγ - ½(∫|f| dγ)² ≤ ∫|∇f|² dγ`, with the hypothesis placed on `γ f²`.
///
/// The intermediate entropy form at `p = 1` is recorded under `entropy_form_*`.
pub fn poincare_check(f: &GridField, beta: f64, rule: &QuadratureRule) -> Result<DeficitReport> {
    let dim = f.dim();
    let d = dn(dim, beta)?;
    let l2 = gauss_expect(dim, rule, |x| {
        let v = f.value_at(x);
        v * v
    })?;
    let l1 = gauss_expect(dim, rule, |x| f.value_at(x).abs())?;
    let energy = dirichlet_energy(f, rule)?;
    let lhs = 0.5 * (1.0 + d) * l2 - 0.5 * l1 * l1;
    let goal_lhs = l2 * ln(l2 / (l1 * l1));
    let goal_rhs = 2.0 * energy - d * l2;
    let weighted = gaussian_weighted_power(f, 2.0)?;
    let report = DeficitReport::new("poincare", lhs, energy, d, Sense::AtMost)
        .param("beta", beta)
        .param("dn", d)
        .param("improves_classical", if d > 1.0 { 1.0 } else { 0.0 })
        .param("entropy_form_lhs", goal_lhs)
        .param("entropy_form_rhs", goal_rhs)
        .param("entropy_form_slack", goal_rhs - goal_lhs);
    Ok(with_certificate(report, regime_certificate(&weighted, beta)?))
}

/// `(1/(2-p))[∫ f² dγ - B(p,β)(∫ f^p dγ)^{2/p}] ≤ ∫|∇f|² dγ` for `f ≥ 0`, `1 < p < 2`,
/// with the hypothesis placed on `γ f^p`. The semigroup variance bound at
/// `s = -½ log(p-1)` is recorded under `variance_*`.
pub fn beckner_check(f: &GridField, p: f64, beta: f64, rule: &QuadratureRule) -> Result<DeficitReport> {
    if !(p > 1.0 && p < 2.0) {
        return Err(param("Beckner exponent must lie in (1, 2)"));
    }
    if let Some(i) = f.values().iter().position(|v| *v < 0.0) {
        return Err(Error::Positivity { index: i, value: f.values()[i] });
    }
    let dim = f.dim();
    let constant = beckner_b(dim, p, beta)?;
    let l2 = gauss_expect(dim, rule, |x| {
        let v = f.value_at(x);
        v * v
    })?;
    let lp = gauss_expect(dim, rule, |x| powf(f.value_at(x), p))?;
    let energy = dirichlet_energy(f, rule)?;
    let lhs = (l2 - constant * powf(lp, 2.0 / p)) / (2.0 - p);

    let s = -0.5 * ln(p - 1.0);
    let mut failure = None;
    let smoothed = gauss_expect(dim, rule, |x| match ou_at(&|z| f.value_at(z), x, s, rule) {
        Ok(v) => v * v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let variance_lhs = l2 - smoothed;
    let variance_rhs = -expm1(-2.0 * s) * energy;
    let weighted = gaussian_weighted_power(f, p)?;
    let report = DeficitReport::new("beckner", lhs, energy, constant, Sense::AtMost)
        .param("beta", beta)
        .param("p", p)
        .param("variance_lhs", variance_lhs)
        .param("variance_rhs", variance_rhs)
        .param("variance_slack", variance_rhs - variance_lhs);
    Ok(with_certificate(report, regime_certificate(&weighted, beta)?))
}

/// Quadratic form, exponents and base constant of the dual Brascamp–Lieb form.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlData {
    pub c1: f64,
    pub c2: f64,
    /// `π`-normalized form: the Gaussian weight is `exp(-π x·Qx)`.
    pub form: Mat2,
    /// `(2π)^{1-(c1+c2)/2} sqrt(1 - e^{-2s})`.
    pub base_constant: f64,
    pub sense: Sense,
}

/// Tolerance on the scaling condition `c1 + c2 = 1 + (1 - e^{-2s}) c1 c2`.
pub const SCALING_TOL: f64 = 1e-10;

/// Residual of the scaling condition.
pub fn bl_scaling_residual(c1: f64, c2: f64, s: f64) -> f64 {
    c1 + c2 - 1.0 - (-expm1(-2.0 * s)) * c1 * c2
}

/// Exponents `c1 = 1/p`, `c2 = 1/q'`, the form `Q` and the direction of the inequality.
pub fn bl_data(triple: &ExponentTriple) -> Result<BlData> {
    let s = triple.s();
    let c1 = 1.0 / triple.p();
    let c2 = 1.0 - 1.0 / triple.q();
    if bl_scaling_residual(c1, c2, s).abs() > SCALING_TOL {
        return Err(Error::InadmissibleExponent { p: triple.p(), q: triple.q() });
    }
    let (decay, noise) = mehler(s);
    let k = 1.0 / (2.0 * core::f64::consts::PI * noise);
    let form = [[k * (1.0 - noise * c1), -k * decay], [-k * decay, k * (1.0 - noise * c2)]];
    let in_unit = |c: f64| c > 0.0 && c < 1.0;
    let sense = if in_unit(c1) && in_unit(c2) {
        Sense::AtMost
    } else if c1 * c2 < 0.0 || (c1 > 1.0 && c2 > 1.0) {
        Sense::AtLeast
    } else {
        return Err(param("exponents outside the covered Brascamp-Lieb cases"));
    };
    Ok(BlData { c1, c2, form, base_constant: bl_h(c1, c2, s)?, sense })
}

/// Ratio of integrand at the grid boundary to its peak above which the double integral
/// is treated as truncated.
const BL_EDGE_RATIO: f64 = 1e-12;

/// `∬ exp(-π x·Qx) f1(x1)^{c1} f2(x2)^{c2} dx` against `𝓗 ∏(∫ f_j)^{c_j}` with
/// `𝓗 = H · ‖P_s[(γ_β/γ)^{c1}]‖_q`.
///
/// Exponents in `(0,1)` give `≤` and need `β > 1`; `c1 c2 < 0` gives `≥` with `β > 1`;
/// both above 1 give `≥` with `β < 1`. The hypothesis is on `f1` only: `(log f1)'' ≥ -1/β`,
/// or `≤ -1/β` in the last case. `β = 1` is the classical form.
pub fn brascamp_lieb_check(
    f1: &GridField,
    f2: &GridField,
    triple: &ExponentTriple,
    beta: f64,
) -> Result<DeficitReport> {
    let data = bl_data(triple)?;
    let (g1, g2) = (*f1.grid()?, *f2.grid()?);
    let l1 = f1.log_values()?;
    let l2 = f2.log_values()?;
    let q = data.form;
    let mut terms = Vec::with_capacity(g1.len() * g2.len());
    let mut edge_top = f64::NEG_INFINITY;
    for i in 0..g1.len() {
        let x = g1.point(i);
        for j in 0..g2.len() {
            let y = g2.point(j);
            let quad = q[0][0] * x * x + 2.0 * q[0][1] * x * y + q[1][1] * y * y;
            let t = -core::f64::consts::PI * quad + data.c1 * l1[i] + data.c2 * l2[j];
            if i == 0 || j == 0 || i + 1 == g1.len() || j + 1 == g2.len() {
                edge_top = edge_top.max(t);
            }
            terms.push(ln(g1.trapezoid_weight(i) * g2.trapezoid_weight(j)) + t);
        }
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(edge_top - top < ln(BL_EDGE_RATIO)) {
        return Err(Error::Truncation { tail: exp(edge_top - top), tolerance: BL_EDGE_RATIO });
    }
    let lhs = exp(log_sum_exp(terms.iter().copied()));
    let m1 = f1.trapezoid();
    let m2 = f2.trapezoid();
    let norm = hc_ratio(1, beta, triple)?;
    let constant = data.base_constant * norm;
    let rhs = constant * powf(m1, data.c1) * powf(m2, data.c2);
    let mut report = DeficitReport::new("brascamp-lieb", lhs, rhs, constant, data.sense)
        .param("beta", beta)
        .param("c1", data.c1)
        .param("c2", data.c2)
        .param("s", triple.s())
        .param("base_constant", data.base_constant)
        .param("scaling_residual", bl_scaling_residual(data.c1, data.c2, triple.s()));
    if beta != 1.0 {
        let concave_case = data.c1 > 1.0 && data.c2 > 1.0;
        let regime_ok = if concave_case { beta < 1.0 } else { beta > 1.0 };
        let kind = if concave_case { CertificateKind::Concave } else { CertificateKind::Convex };
        let c = certify(f1, kind, beta, None)?;
        let name = if concave_case { "semi-log-concave" } else { "semi-log-convex" };
        report = report
            .hypothesis("regime", regime_ok, if regime_ok { 0.0 } else { -1.0 })
            .hypothesis(name, c.passed, c.margin);
    }
    Ok(report)
}

/// Second input realising equality in [`brascamp_lieb_check`] for `f1 = γ_β`:
/// `γ · (P_s[(γ_β/γ)^{1/p}])^q`.
pub fn bl_extremal_partner(shape: GridShape, beta: f64, triple: &ExponentTriple) -> Result<GridField> {
    let ratio = LogQuad::gaussian(1, beta)?.times(&LogQuad::gaussian(1, 1.0)?.powf(-1.0)?)?;
    let (decay, noise) = mehler(triple.s());
    let smoothed = ratio.powf(1.0 / triple.p())?.kernel_image(decay, noise)?;
    let partner = smoothed.powf(triple.q())?.times(&LogQuad::gaussian(1, 1.0)?)?;
    GridField::from_log_quad(shape, LogQuadMix::single(partner))
}

/// Symmetric two-Gaussian mixture `½γ(·+a) + ½γ(·-a)` checked against the log-Sobolev
/// bound at `β = cov = 1 + a²`; the subharmonicity certificate at that `β` is recorded.
pub fn counterexample_mixture(a: f64, shape: GridShape, rule: &QuadratureRule) -> Result<DeficitReport> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(param("mixture offset must be non-negative"));
    }
    let mix = LogQuadMix::gaussian_mixture(1, &[alloc::vec![-a], alloc::vec![a]], &[0.5, 0.5], 1.0)?;
    let v = GridField::from_log_quad(shape, mix)?;
    let cov = covariance(&v)?[0][0];
    let ef = relative_entropy_fisher(&v, rule)?;
    let bound = lsi_gauss(1, cov)?;
    let cert = certify(&v, CertificateKind::Subharmonic, cov, None)?;
    Ok(DeficitReport::new("counterexample-mixture", ef.lsi_gap(), bound, bound, Sense::AtMost)
        .hypothesis("semi-log-subharmonic", cert.passed, cert.margin)
        .param("a", a)
        .param("covariance", cov))
}

/// Laplacian of `log P_t f` for `f = e^{x1 x2}` at the requested times.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuperharmonicTrace {
    pub times: Vec<f64>,
    /// Smallest and largest `Δ log P_t f` over interior grid points.
    pub laplacian_range: Vec<(f64, f64)>,
    /// Closed form `2e^{-2t}σ²/(1 - σ⁴)`, `σ² = 1 - e^{-2t}`.
    pub predicted: Vec<f64>,
    /// Margins of the log-superharmonic certificate (`Δ log ≤ 0`).
    pub margins: Vec<f64>,
}

/// Flows `e^{x1 x2}` (log-harmonic) through its exact semigroup image and records the
/// log-Laplacian, which turns positive for `t > 0`.
pub fn counterexample_superharmonic(times: &[f64], shape: GridShape) -> Result<SuperharmonicTrace> {
    if shape.dim() != 2 {
        return Err(param("the counterexample lives on the plane"));
    }
    let f = LogQuad::new(2, [[0.0, -1.0], [-1.0, 0.0]], [0.0; 2], 0.0)?;
    let mut trace = SuperharmonicTrace {
        times: times.to_vec(),
        laplacian_range: Vec::with_capacity(times.len()),
        predicted: Vec::with_capacity(times.len()),
        margins: Vec::with_capacity(times.len()),
    };
    for &t in times {
        if !(t >= 0.0) {
            return Err(param("times must be non-negative"));
        }
        let image = if t == 0.0 {
            f.clone()
        } else {
            let (decay, noise) = mehler(t);
            f.kernel_image(decay, noise)?
        };
        let field = GridField::from_log_quad(shape, LogQuadMix::single(image))?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, h) in log_hessians(&field)?.iter().enumerate() {
            if shape.is_interior(i, EDGE_EXCLUSION) {
                let lap = h[0][0] + h[1][1];
                lo = lo.min(lap);
                hi = hi.max(lap);
            }
        }
        let sigma2 = -expm1(-2.0 * t);
        trace.laplacian_range.push((lo, hi));
        trace.predicted.push(2.0 * exp(-2.0 * t) * sigma2 / (1.0 - sigma2 * sigma2));
        trace.margins.push(certify(&field, CertificateKind::Superharmonic, f64::INFINITY, Some(0.0))?.margin);
    }
    Ok(trace)
}

/// Names of all checks, for reporting.
pub fn check_names() -> Vec<String> {
    [
        "hc",
        "reverse-hc",
        "lsi",
        "els-eigen",
        "matrix-hc",
        "matrix-lsi",
        "matrix-talagrand",
        "poincare",
        "beckner",
        "brascamp-lieb",
        "counterexample-mixture",
    ]
    .iter()
    .map(|s| String::from(*s))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{fp_class_member, MeasureSpec};
    use crate::numerics::{gauss_hermite_rule, Grid1D};
    use alloc::vec;

    fn rule() -> QuadratureRule {
        gauss_hermite_rule(96).unwrap()
    }

    fn line() -> GridShape {
        GridShape::desk_line()
    }

    fn gauss(var: f64) -> GridField {
        GridField::gaussian(line(), var).unwrap()
    }

    fn fp_member(beta: f64) -> GridField {
        let mu = MeasureSpec::Discrete { points: vec![vec![-1.2], vec![0.3], vec![2.0]], weights: vec![0.3, 0.5, 0.2] };
        fp_class_member(&mu, beta, &line(), &rule()).unwrap().0
    }

    const PAIRS: [(f64, f64); 3] = [(2.0, 4.0), (1.5, 3.0), (3.0, 6.0)];

    #[test]
    fn hc_equality_at_gaussians() {
        for (p, q) in PAIRS {
            let t = ExponentTriple::from_pq(p, q).unwrap();
            for beta in [0.25, 0.5, 2.0, 4.0] {
                let r = hc_check(&gauss(beta), beta, &t, &rule()).unwrap();
                assert!(r.hypotheses_pass(), "{:?}", r.hypotheses);
                assert!(r.slack.abs() < 1e-6, "({p},{q}) beta {beta}: {}", r.slack);
            }
        }
    }

    #[test]
    fn hc_on_class_member() {
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        let r = hc_check(&fp_member(2.0), 2.0, &t, &rule()).unwrap();
        assert!(r.hypotheses_pass(), "{:?}", r.hypotheses);
        assert!(r.slack >= -SLACK_TOL);
    }

    #[test]
    fn hc_at_one_is_classical() {
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        let r = hc_check(&fp_member(3.0), 1.0, &t, &rule()).unwrap();
        assert!((r.sharp_constant - 1.0).abs() < 1e-15);
        assert!(r.hypotheses.iter().all(|h| h.name == "l2-weighted"));
        assert!(r.slack >= 0.0);
    }

    #[test]
    fn reverse_hc_equality_and_class_member() {
        for (p, q) in [(-1.0, -3.0), (0.5, 0.25)] {
            let t = ExponentTriple::from_pq(p, q).unwrap();
            let r = reverse_hc_check(&gauss(2.0), 2.0, &t, &rule()).unwrap();
            assert!(r.slack.abs() < 1e-6, "({p},{q}): {}", r.slack);
            let r = reverse_hc_check(&fp_member(2.0), 2.0, &t, &rule()).unwrap();
            assert!(r.hypotheses_pass(), "{:?}", r.hypotheses);
            assert!(r.slack >= -SLACK_TOL, "({p},{q}): {}", r.slack);
        }
    }

    #[test]
    fn reverse_hc_opposite_signs_below_one() {
        let t = ExponentTriple::from_ps(0.2, 0.5 * ln(2.0)).unwrap();
        assert_eq!(t.regime(), Regime::ReverseOppositeSign);
        let r = reverse_hc_check(&gauss(0.5), 0.5, &t, &rule()).unwrap();
        assert!(r.hypotheses_pass());
        assert!(r.slack.abs() < 1e-6);
    }

    #[test]
    fn reverse_hc_rejects_forward_pairs() {
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        assert!(reverse_hc_check(&gauss(2.0), 2.0, &t, &rule()).is_err());
    }

    #[test]
    fn lsi_equality_and_ordering() {
        for beta in [0.25, 0.5, 2.0, 4.0] {
            let r = lsi_check(&gauss(beta), beta, &rule()).unwrap();
            assert!(r.slack.abs() < 1e-6, "{beta}: {}", r.slack);
        }
        // γ_a with a ≤ β ≤ 1 is β-semi-log-concave, so the bound at β applies
        let r = lsi_check(&gauss(0.25), 0.5, &rule()).unwrap();
        assert!(r.hypotheses_pass() && r.slack >= 0.0);
        let r = lsi_check(&fp_member(2.0), 2.0, &rule()).unwrap();
        assert!(r.hypotheses_pass() && r.slack >= -SLACK_TOL);
    }

    #[test]
    fn els_eigen_cases() {
        for beta in [0.25, 0.5, 1.0] {
            let r = els_eigen_check(&gauss(beta), &rule()).unwrap();
            assert!(r.slack.abs() < 1e-6, "{beta}: {}", r.slack);
        }
        let shape = GridShape::desk_plane();
        let v =
            GridField::from_log_quad(shape, LogQuadMix::single(LogQuad::gaussian_diag([0.5, 2.0]).unwrap())).unwrap();
        let r = els_eigen_check(&v, &gauss_hermite_rule(48).unwrap()).unwrap();
        assert!((r.sharp_constant - lsi_gauss(1, 0.5).unwrap()).abs() < 1e-5);
        assert!(r.slack >= -SLACK_TOL_2D);
    }

    fn plane_gauss(b: [f64; 2]) -> GridField {
        GridField::from_log_quad(GridShape::desk_plane(), LogQuadMix::single(LogQuad::gaussian_diag(b).unwrap()))
            .unwrap()
    }

    #[test]
    fn matrix_equality_at_gaussians() {
        let rule = gauss_hermite_rule(40).unwrap();
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        for (b, side) in [([3.0, 1.5], MatrixSide::Convex), ([0.5, 0.8], MatrixSide::Concave)] {
            let v = plane_gauss(b);
            for which in [MatrixInequality::Hc, MatrixInequality::Lsi] {
                let r = matrix_check(&v, b, Some(&t), which, side, &rule).unwrap();
                assert!(r.hypotheses_pass());
                assert!(r.slack.abs() < 1e-5, "{b:?} {side:?} {which:?}: {}", r.slack);
            }
        }
        // mixed eigenvalues satisfy both sides; only the matching factors enter the bound
        for side in [MatrixSide::Convex, MatrixSide::Concave] {
            for which in [MatrixInequality::Hc, MatrixInequality::Lsi] {
                let r = matrix_check(&plane_gauss([2.0, 0.5]), [2.0, 0.5], Some(&t), which, side, &rule).unwrap();
                assert!(r.hypotheses_pass() && r.slack > 1e-3, "{side:?} {which:?}: {}", r.slack);
            }
        }
        let r =
            matrix_check(&plane_gauss([2.0, 0.5]), [2.0, 0.5], None, MatrixInequality::Lsi, MatrixSide::Convex, &rule)
                .unwrap();
        assert!((r.sharp_constant - lsi_gauss(1, 2.0).unwrap()).abs() < 1e-12);
        let v = GridField::from_log_quad(
            GridShape::square(-8.0, 8.0, 257).unwrap(),
            LogQuadMix::single(LogQuad::gaussian_diag([0.5, 0.8]).unwrap()),
        )
        .unwrap();
        let r = matrix_check(&v, [0.5, 0.8], None, MatrixInequality::Talagrand, MatrixSide::Concave, &rule).unwrap();
        assert!(r.hypotheses_pass());
        assert!(r.slack.abs() < 1e-4, "{}", r.slack);
    }

    #[test]
    fn poincare_closed_form() {
        let beta = 2.0;
        let shape = line();
        let f = GridField::from_log_fn(shape, move |x| {
            0.5 * (-0.5 * x[0] * x[0] / beta - 0.5 * ln(beta) + 0.5 * x[0] * x[0])
        })
        .unwrap();
        let r = poincare_check(&f, beta, &rule()).unwrap();
        let l1 = libm::sqrt(2.0 * libm::sqrt(beta) / (1.0 + beta));
        let energy = 0.25 * (1.0 - 1.0 / beta) * (1.0 - 1.0 / beta) * beta;
        let d = dn(1, beta).unwrap();
        assert!((r.rhs - energy).abs() < 1e-10);
        assert!((r.lhs - (0.5 * (1.0 + d) - 0.5 * l1 * l1)).abs() < 1e-10);
        assert!(r.hypotheses_pass() && r.slack >= 0.0);
        assert!(r.params["entropy_form_slack"] >= -1e-10);
    }

    #[test]
    fn poincare_gain_threshold() {
        let shape = line();
        let f = GridField::from_fn(shape, |_| 1.0).unwrap();
        assert_eq!(poincare_check(&f, 25.0, &rule()).unwrap().params["improves_classical"], 1.0);
        assert_eq!(poincare_check(&f, 10.0, &rule()).unwrap().params["improves_classical"], 0.0);
    }

    #[test]
    fn beckner_at_gaussian_ratio() {
        let beta = 2.0;
        let p = 1.5;
        // f^p γ = γ_β
        let f = GridField::from_log_fn(line(), move |x| {
            (-0.5 * x[0] * x[0] / beta - 0.5 * ln(beta) + 0.5 * x[0] * x[0]) / p
        })
        .unwrap();
        let r = beckner_check(&f, p, beta, &rule()).unwrap();
        assert!(r.hypotheses_pass(), "{:?}", r.hypotheses);
        assert!(r.slack >= -SLACK_TOL);
        assert!(r.params["variance_slack"] >= -1e-8);
    }

    #[test]
    fn bl_scaling_condition() {
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        let d = bl_data(&t).unwrap();
        assert!((d.c1 - 0.5).abs() < 1e-15 && (d.c2 - 0.75).abs() < 1e-15);
        assert!(bl_scaling_residual(0.5, 0.75, t.s()).abs() < 1e-15);
        assert_eq!(d.sense, Sense::AtMost);
        assert_eq!(bl_data(&ExponentTriple::from_pq(-1.0, -3.0).unwrap()).unwrap().sense, Sense::AtLeast);
    }

    #[test]
    fn bl_equality_at_extremal_pair() {
        let shape = GridShape::Line(Grid1D::new(-20.0, 20.0, 1201).unwrap());
        for ((p, q), beta) in [((2.0, 4.0), 2.0), ((-1.0, -3.0), 2.0), ((2.0, 4.0), 1.0)] {
            let t = ExponentTriple::from_pq(p, q).unwrap();
            let f1 = GridField::gaussian(shape, beta).unwrap();
            let f2 = bl_extremal_partner(shape, beta, &t).unwrap();
            let r = brascamp_lieb_check(&f1, &f2, &t, beta).unwrap();
            assert!(r.hypotheses_pass());
            assert!((r.slack / r.rhs).abs() < 1e-4, "({p},{q}) beta {beta}: {} vs {}", r.lhs, r.rhs);
        }
    }

    #[test]
    fn bl_classical_with_arbitrary_gaussians() {
        let shape = GridShape::Line(Grid1D::new(-12.0, 12.0, 801).unwrap());
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        let f1 = GridField::gaussian(shape, 3.0).unwrap();
        let f2 = GridField::gaussian(shape, 0.7).unwrap();
        let r = brascamp_lieb_check(&f1, &f2, &t, 1.0).unwrap();
        assert!((r.sharp_constant - r.params["base_constant"]).abs() < 1e-15);
        assert!(r.slack >= 0.0);
    }

    #[test]
    fn mixture_counterexample() {
        let r = counterexample_mixture(4.0, line(), &rule()).unwrap();
        assert!(r.params["covariance"] > 16.0);
        assert!(r.slack < 0.0);
        assert!(!r.hypotheses_pass());
        assert!(r.lhs.abs() < core::f64::consts::LN_2 + 0.01);
        let r = counterexample_mixture(0.0, line(), &rule()).unwrap();
        assert!(r.lhs.abs() < 1e-8 && r.rhs.abs() < 1e-8);
    }

    #[test]
    fn superharmonic_counterexample() {
        let trace = counterexample_superharmonic(&[0.0, 0.1, 0.5], GridShape::desk_plane()).unwrap();
        assert_eq!(trace.laplacian_range[0], (0.0, 0.0));
        for k in 1..3 {
            let (lo, hi) = trace.laplacian_range[k];
            assert!(lo > 0.0 && (hi - trace.predicted[k]).abs() < 1e-12);
            assert!(trace.margins[k] < 0.0);
        }
    }
}
