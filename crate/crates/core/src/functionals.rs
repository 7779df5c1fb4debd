//! Entropy, Fisher information, Gaussian `L^r` norms, the flow functional and the
//! closed-form sharp constants.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::flows::{fp_evolve, FPParams, MeasureSpec};
use crate::math::{exp, expm1, ln, ln1p, powf, sqrt, LN_2PI};
use crate::numerics::{log_derivatives, log_gaussian_average, GridField, GridShape, QuadratureRule};
use crate::semigroups::{beta_s, ou_log_at, ExponentTriple, Regime};

/// Values below this contribute exactly zero to entropy integrands.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// Entropy and Fisher information relative to the standard Gaussian.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntFisher {
    pub entropy: f64,
    pub fisher: f64,
    /// `∫ f dγ`.
    pub mass: f64,
}

impl EntFisher {
    /// `Ent - ½ I`.
    pub fn lsi_gap(&self) -> f64 {
        self.entropy - 0.5 * self.fisher
    }
}

fn log_std_gaussian(x: &[f64]) -> f64 {
    let sq: f64 = x.iter().map(|v| v * v).sum();
    -0.5 * sq - 0.5 * x.len() as f64 * LN_2PI
}

fn log_gaussian(x: &[f64], var: f64) -> f64 {
    let sq: f64 = x.iter().map(|v| v * v).sum();
    -0.5 * sq / var - 0.5 * x.len() as f64 * (LN_2PI + ln(var))
}

/// Tensor Gauss–Hermite nodes for `γ_b` in `dim` dimensions, with log weights.
fn tensor_nodes(dim: usize, b: f64, rule: &QuadratureRule) -> Vec<([f64; 2], f64)> {
    let r = sqrt(b);
    let mut out = Vec::with_capacity(rule.len().pow(dim as u32));
    if dim == 1 {
        for (x, w) in rule.iter() {
            if w > 0.0 {
                out.push(([r * x, 0.0], ln(w)));
            }
        }
    } else {
        for (x, wx) in rule.iter() {
            for (y, wy) in rule.iter() {
                if wx > 0.0 && wy > 0.0 {
                    out.push(([r * x, r * y], ln(wx) + ln(wy)));
                }
            }
        }
    }
    out
}

/// Largest mean second moment per axis of a density sampled on its grid; used to pick
/// the width of the reference Gaussian in quadratures against the density.
fn reference_variance(v: &GridField) -> f64 {
    let shape = v.shape();
    let dim = shape.dim();
    let mut m = 0.0;
    let mut second = [0.0; 2];
    for (i, val) in v.values().iter().enumerate() {
        let p = shape.point(i);
        let w = shape.weight(i) * val;
        m += w;
        for a in 0..dim {
            second[a] += w * p[a] * p[a];
        }
    }
    let b = second[..dim].iter().cloned().fold(0.0, f64::max) / m;
    if b.is_finite() && b > 0.0 {
        b.max(0.05)
    } else {
        1.0
    }
}

/// Entropy and Fisher information of the density `v` relative to `γ`, that is of `v/γ`.
///
/// With an evaluator the integrals use Gauss–Hermite nodes for a reference Gaussian
/// matched to the second moment of `v`; for sampled fields they use the trapezoid rule
/// and finite differences on the grid.
pub fn relative_entropy_fisher(v: &GridField, rule: &QuadratureRule) -> Result<EntFisher> {
    if v.values().iter().any(|x| *x < 0.0) {
        return Err(Error::Domain("density takes negative values".into()));
    }
    match v.analytic() {
        Some(_) => {
            let b = reference_variance(v);
            ent_fisher_quadrature(&|x| v.log_at(x), &|x| v.grad_log_at(x), v.dim(), b, rule)
        }
        None => ent_fisher_grid(v),
    }
}

/// Entropy and Fisher information of `f` relative to `γ`.
pub fn entropy_fisher(f: &GridField, rule: &QuadratureRule) -> Result<EntFisher> {
    if f.values().iter().any(|x| *x < 0.0) {
        return Err(Error::Domain("function takes negative values".into()));
    }
    let shape = *f.shape();
    let dim = shape.dim();
    match f.analytic() {
        Some(_) => {
            let density_values: Vec<f64> = (0..shape.len())
                .map(|i| {
                    let x = shape.point(i);
                    f.values()[i] * exp(log_std_gaussian(&x[..dim]))
                })
                .collect();
            let b = reference_variance(&GridField::from_values(shape, density_values)?);
            ent_fisher_quadrature(
                &|x| f.log_at(x) + log_std_gaussian(x),
                &|x| {
                    let g = f.grad_log_at(x);
                    [g[0] - x[0], if x.len() > 1 { g[1] - x[1] } else { 0.0 }]
                },
                dim,
                b,
                rule,
            )
        }
        None => {
            let values: Vec<f64> = (0..shape.len())
                .map(|i| {
                    let x = shape.point(i);
                    f.values()[i] * exp(log_std_gaussian(&x[..dim]))
                })
                .collect();
            ent_fisher_grid(&GridField::from_values(shape, values)?)
        }
    }
}

fn ent_fisher_quadrature(
    log_v: &dyn Fn(&[f64]) -> f64,
    grad_log_v: &dyn Fn(&[f64]) -> [f64; 2],
    dim: usize,
    b: f64,
    rule: &QuadratureRule,
) -> Result<EntFisher> {
    let mut mass = 0.0;
    let mut ent = 0.0;
    let mut fisher = 0.0;
    for (x, lw) in tensor_nodes(dim, b, rule) {
        let x = &x[..dim];
        let lv = log_v(x);
        if lv.is_nan() || lv == f64::INFINITY {
            return Err(Error::Evaluation { node: x.to_vec() });
        }
        // v dx = (v/γ_b) dγ_b
        let weight = exp(lw + lv - log_gaussian(x, b));
        if !weight.is_finite() {
            return Err(Error::Integrability("density outgrows the reference Gaussian".into()));
        }
        if exp(lv) < ENTROPY_FLOOR {
            continue;
        }
        mass += weight;
        ent += weight * (lv - log_std_gaussian(x));
        let g = grad_log_v(x);
        let mut sq = 0.0;
        for a in 0..dim {
            let score = g[a] + x[a];
            sq += score * score;
        }
        fisher += weight * sq;
    }
    finish(mass, ent, fisher)
}

fn ent_fisher_grid(v: &GridField) -> Result<EntFisher> {
    let shape = *v.shape();
    let dim = shape.dim();
    let logs = positive_logs(v)?;
    let d = log_derivatives(&GridField::from_values(shape, logs.iter().map(|l| exp(*l)).collect())?)?;
    let mut mass = 0.0;
    let mut ent = 0.0;
    let mut fisher = 0.0;
    for (i, val) in v.values().iter().enumerate() {
        if *val < ENTROPY_FLOOR {
            continue;
        }
        let x = shape.point(i);
        let w = shape.weight(i) * val;
        mass += w;
        ent += w * (logs[i] - log_std_gaussian(&x[..dim]));
        let mut sq = 0.0;
        for a in 0..dim {
            let score = d.grad[a].values()[i] + x[a];
            sq += score * score;
        }
        fisher += w * sq;
    }
    finish(mass, ent, fisher)
}

/// Logs of a sampled density with tiny values lifted to the floor so differences stay finite.
fn positive_logs(v: &GridField) -> Result<Vec<f64>> {
    Ok(v.values().iter().map(|x| ln(x.max(ENTROPY_FLOOR))).collect())
}

fn finish(mass: f64, ent: f64, fisher: f64) -> Result<EntFisher> {
    if !(mass > 0.0) {
        return Err(Error::Domain("zero total mass".into()));
    }
    Ok(EntFisher { entropy: ent - mass * ln(mass), fisher, mass })
}

/// `log ∫ |f|^r dγ` on Gauss–Hermite nodes, given `log |f|`.
///
/// Nodes follow the peak of the weighted integrand; an integrand whose peak keeps
/// escaping is treated as divergent.
pub fn log_moment(log_abs: &dyn Fn(&[f64]) -> f64, dim: usize, r: f64, rule: &QuadratureRule) -> Result<f64> {
    let bad: core::cell::Cell<Option<[f64; 2]>> = core::cell::Cell::new(None);
    let term = |x: &[f64]| {
        let l = log_abs(x);
        if l.is_nan() || (r > 0.0 && l == f64::INFINITY) || (r < 0.0 && l == f64::NEG_INFINITY) {
            let mut at = [0.0; 2];
            at[..x.len()].copy_from_slice(x);
            bad.set(Some(at));
            return f64::NAN;
        }
        r * l
    };
    let out = log_gaussian_average(&term, dim, rule);
    if let Some(at) = bad.get() {
        return Err(Error::Integrability(alloc::format!("|f|^{r} is not finite at {:?}", &at[..dim])));
    }
    out.ok_or_else(|| Error::Integrability(alloc::format!("|f|^{r} is not integrable against the Gaussian")))
}

/// `(∫ |f|^r dγ)^{1/r}`; `r < 0` requires `f > 0`.
pub fn lp_norm_gaussian(f: &GridField, r: f64, rule: &QuadratureRule) -> Result<f64> {
    if r == 0.0 || !r.is_finite() {
        return Err(param("exponent must be finite and non-zero"));
    }
    if r < 0.0 {
        if let Some(i) = f.values().iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Positivity { index: i, value: f.values()[i] });
        }
    }
    let lm = log_moment(&|x| ln(f.value_at(x).abs()), f.dim(), r, rule)?;
    Ok(exp(lm / r))
}

/// Names of the closed-form constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConstantName {
    HcRatio,
    LsiGauss,
    TalagrandGauss,
    Mikulincer,
    Dn,
    BecknerB,
    HjT,
    BlH,
}

impl ConstantName {
    pub const ALL: [ConstantName; 8] = [
        ConstantName::HcRatio,
        ConstantName::LsiGauss,
        ConstantName::TalagrandGauss,
        ConstantName::Mikulincer,
        ConstantName::Dn,
        ConstantName::BecknerB,
        ConstantName::HjT,
        ConstantName::BlH,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstantName::HcRatio => "hc_ratio",
            ConstantName::LsiGauss => "lsi_gauss",
            ConstantName::TalagrandGauss => "talagrand_gauss",
            ConstantName::Mikulincer => "mikulincer",
            ConstantName::Dn => "dn",
            ConstantName::BecknerB => "beckner_b",
            ConstantName::HjT => "hj_t",
            ConstantName::BlH => "bl_h",
        }
    }
}

/// Inputs for [`sharp_constant`]; only the fields a constant needs are read.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantParams {
    pub dim: usize,
    pub beta: f64,
    /// `(p, q)` for `hc_ratio`.
    pub exponents: Option<(f64, f64)>,
    /// `p` for `beckner_b`.
    pub p: Option<f64>,
    /// `τ` for `hj_t`.
    pub tau: Option<f64>,
    /// `(c1, c2, s)` for `bl_h`.
    pub bl: Option<(f64, f64, f64)>,
}

impl ConstantParams {
    pub fn new(dim: usize, beta: f64) -> Self {
        Self { dim, beta, exponents: None, p: None, tau: None, bl: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SharpConstant {
    pub name: ConstantName,
    pub value: f64,
    pub params: BTreeMap<String, f64>,
}

pub fn sharp_constant(name: ConstantName, params: &ConstantParams) -> Result<SharpConstant> {
    let n = params.dim;
    let beta = params.beta;
    let mut record = BTreeMap::new();
    record.insert("n".into(), n as f64);
    record.insert("beta".into(), beta);
    let missing = |what: &str| param(alloc::format!("{} needs {what}", name.as_str()));
    let value = match name {
        ConstantName::HcRatio => {
            let (p, q) = params.exponents.ok_or_else(|| missing("p and q"))?;
            record.insert("p".into(), p);
            record.insert("q".into(), q);
            hc_ratio(n, beta, &ExponentTriple::from_pq(p, q)?)?
        }
        ConstantName::LsiGauss => lsi_gauss(n, beta)?,
        ConstantName::TalagrandGauss => talagrand_gauss(n, beta)?,
        ConstantName::Mikulincer => mikulincer(n, beta)?,
        ConstantName::Dn => dn(n, beta)?,
        ConstantName::BecknerB => {
            let p = params.p.ok_or_else(|| missing("p"))?;
            record.insert("p".into(), p);
            beckner_b(n, p, beta)?
        }
        ConstantName::HjT => {
            let tau = params.tau.ok_or_else(|| missing("tau"))?;
            record.insert("tau".into(), tau);
            hj_t(n, tau, beta)?
        }
        ConstantName::BlH => {
            let (c1, c2, s) = params.bl.ok_or_else(|| missing("c1, c2 and s"))?;
            record.remove("beta");
            record.insert("c1".into(), c1);
            record.insert("c2".into(), c2);
            record.insert("s".into(), s);
            bl_h(c1, c2, s)?
        }
    };
    Ok(SharpConstant { name, value, params: record })
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(param("beta must be positive and finite"))
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(param("dimension must be at least 1"))
    }
}

/// `β^{n/2p'} β_s^{-n/2q'}`.
pub fn hc_ratio(n: usize, beta: f64, triple: &ExponentTriple) -> Result<f64> {
    check_dim(n)?;
    let bs = beta_s(beta, triple)?;
    if !bs.admissible() {
        return Err(param("beta_s is not positive; the constant is undefined"));
    }
    let nf = n as f64;
    Ok(exp(nf / (2.0 * triple.p_dual()) * ln(beta) - nf / (2.0 * triple.q_dual()) * ln(bs.value)))
}

/// `-(n/2)(log β - 1 + 1/β)`.
pub fn lsi_gauss(n: usize, beta: f64) -> Result<f64> {
    Ok(-dn(n, beta)?)
}

/// `(n/2)(log β - 1 + 1/β)`.
pub fn dn(n: usize, beta: f64) -> Result<f64> {
    check_dim(n)?;
    check_beta(beta)?;
    Ok(0.5 * n as f64 * (ln(beta) - 1.0 + 1.0 / beta))
}

/// `n(1 + ½ log β - √β)`.
pub fn talagrand_gauss(n: usize, beta: f64) -> Result<f64> {
    check_dim(n)?;
    check_beta(beta)?;
    Ok(n as f64 * (1.0 + 0.5 * ln(beta) - sqrt(beta)))
}

/// `-n(2(1-β) + (β+1) log β) / (2(β-1))`, with its limit 0 at `β = 1`.
pub fn mikulincer(n: usize, beta: f64) -> Result<f64> {
    check_dim(n)?;
    check_beta(beta)?;
    let u = beta - 1.0;
    let nf = n as f64;
    if u == 0.0 {
        return Ok(0.0);
    }
    if u.abs() < 1e-2 {
        // Taylor expansion around β = 1 avoids the cancellation in the quotient.
        let u2 = u * u;
        let series = -u2 / 12.0 + u2 * u / 12.0 - 3.0 * u2 * u2 / 40.0 + u2 * u2 * u / 15.0 - 5.0 * u2 * u2 * u2 / 84.0;
        return Ok(nf * series);
    }
    Ok(-nf * (-2.0 * u + (beta + 1.0) * ln(beta)) / (2.0 * u))
}

/// `β^{n/p'} (1 + (β-1)·2/p')^{-n/2}` for `p ∈ [1, 2]`.
pub fn beckner_b(n: usize, p: f64, beta: f64) -> Result<f64> {
    check_dim(n)?;
    check_beta(beta)?;
    if !(1.0..=2.0).contains(&p) {
        return Err(param("Beckner exponent must lie in [1, 2]"));
    }
    let inv_dual = (p - 1.0) / p;
    let base = 1.0 + (beta - 1.0) * 2.0 * inv_dual;
    if !(base > 0.0) {
        return Err(param("Beckner constant undefined for these parameters"));
    }
    let nf = n as f64;
    Ok(exp(nf * inv_dual * ln(beta) - 0.5 * nf * ln(base)))
}

/// `(e^{-1}(1+τ(1-1/β))^{1/(τ(1-1/β))})^{(n/2)(1-1/β)}`, with its limit 1 at `β = 1`.
pub fn hj_t(n: usize, tau: f64, beta: f64) -> Result<f64> {
    check_dim(n)?;
    check_beta(beta)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(param("tau must be positive"));
    }
    if beta == 1.0 {
        return Ok(1.0);
    }
    let c = 1.0 - 1.0 / beta;
    let k = tau * c;
    if !(k > -1.0) {
        return Err(param("tau(1 - 1/beta) must exceed -1"));
    }
    let inner = if k.abs() < 1e-8 { -k / 2.0 + k * k / 3.0 } else { ln1p(k) / k - 1.0 };
    Ok(exp(0.5 * n as f64 * c * inner))
}

/// `(2π)^{1-(c1+c2)/2} sqrt(1 - e^{-2s})`.
pub fn bl_h(c1: f64, c2: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(param("Brascamp-Lieb constant needs finite exponents and s > 0"));
    }
    Ok(powf(2.0 * core::f64::consts::PI, 1.0 - 0.5 * (c1 + c2)) * sqrt(-expm1(-2.0 * s)))
}

/// `Q(t) = ∫ (P_s[(v_t/γ)^{1/p}])^q dγ` along the flow of speed `β` started at `v0`.
///
/// `shape` is only the sampling grid of `v_t`; the outer integral and the kernel
/// average use `rule`.
pub fn q_functional(
    v0: &MeasureSpec,
    beta: f64,
    triple: &ExponentTriple,
    t: f64,
    shape: &GridShape,
    rule: &QuadratureRule,
) -> Result<f64> {
    let vt = fp_evolve(v0, FPParams::new(beta, t)?, shape, rule)?;
    Ok(exp(log_hc_moment(&|x| vt.log_at(x), vt.dim(), triple, rule)?))
}

/// `log ∫ (P_s[(v/γ)^{1/p}])^q dγ` with `v` given through `log v`.
pub fn log_hc_moment(
    log_v: &dyn Fn(&[f64]) -> f64,
    dim: usize,
    triple: &ExponentTriple,
    rule: &QuadratureRule,
) -> Result<f64> {
    let (p, q, s) = (triple.p(), triple.q(), triple.s());
    let log_g = |z: &[f64]| (log_v(z) - log_std_gaussian(z)) / p;
    let mut failure = None;
    let log_pg = |x: &[f64]| match ou_log_at(&log_g, x, s, rule) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let out = {
        let cell = core::cell::RefCell::new(log_pg);
        log_moment(&|x| (cell.borrow_mut())(x), dim, q, rule)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    out
}

/// `lim_{t→∞} Q(t) = (hc_ratio · m^{1/p})^q` with `m` the mass of `v0`.
pub fn q_functional_limit(mass: f64, dim: usize, beta: f64, triple: &ExponentTriple) -> Result<f64> {
    Ok(powf(hc_ratio(dim, beta, triple)? * powf(mass, 1.0 / triple.p()), triple.q()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Monotonicity {
    NonDecreasing,
    NonIncreasing,
}

/// Direction in which `Q` moves along the flow for inputs with the matching structure,
/// or `None` outside the covered regimes.
pub fn q_monotonicity(beta: f64, triple: &ExponentTriple) -> Option<Monotonicity> {
    let threshold = -expm1(-2.0 * triple.s());
    let p = triple.p();
    match triple.regime() {
        Regime::Forward if beta >= 1.0 => Some(Monotonicity::NonDecreasing),
        Regime::Forward => Some(Monotonicity::NonIncreasing),
        _ if p < 0.0 && beta > 1.0 => Some(Monotonicity::NonDecreasing),
        _ if p > 0.0 && p < threshold && beta < 1.0 => Some(Monotonicity::NonDecreasing),
        _ if p > threshold && p < 1.0 && beta > 1.0 => Some(Monotonicity::NonIncreasing),
        _ => None,
    }
}

/// Finite-difference slope at `s = 0` of `‖P_s[f^{1/2}]‖_{q(s)} / ψ(s)`, `q(s) = 1 + e^{2s}`,
/// with `f = v/γ` and `ψ` the same norm for `γ_β/γ`; also returns `ψ'(0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrossSlope {
    pub slope: f64,
    pub psi_prime: f64,
    /// `½ m^{-1/2}(Ent - ½ I - 2ψ'(0) m)` with `m = ∫ f dγ`.
    pub predicted: f64,
}

pub fn gross_slope(v: &GridField, beta: f64, h: f64, rule: &QuadratureRule) -> Result<GrossSlope> {
    check_beta(beta)?;
    if !(h > 1e-4 && h < 1e-1) {
        return Err(param("step must lie in (1e-4, 1e-1)"));
    }
    let dim = v.dim();
    let norm = |log_v: &dyn Fn(&[f64]) -> f64, s: f64| -> Result<f64> {
        let q = 1.0 + exp(2.0 * s);
        if s == 0.0 {
            // ‖f^{1/2}‖_2 = (∫ f dγ)^{1/2}
            return Ok(exp(log_moment(&|x| log_v(x) - log_std_gaussian(x), dim, 1.0, rule)? / 2.0));
        }
        let triple = ExponentTriple::new(2.0, q, s)?;
        Ok(exp(log_hc_moment(log_v, dim, &triple, rule)? / q))
    };
    let log_ref = |x: &[f64]| log_gaussian(x, beta);
    let log_v = |x: &[f64]| v.log_at(x);
    let mut lam = [0.0; 3];
    let mut psi = [0.0; 3];
    for k in 0..3 {
        let s = k as f64 * h;
        psi[k] = norm(&log_ref, s)?;
        lam[k] = norm(&log_v, s)? / psi[k];
    }
    let d = |y: &[f64; 3]| (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    let psi_prime = d(&psi);
    let ef = relative_entropy_fisher(v, rule)?;
    let predicted = 0.5 / sqrt(ef.mass) * (ef.lsi_gap() - 2.0 * psi_prime * ef.mass);
    Ok(GrossSlope { slope: d(&lam), psi_prime, predicted })
}

/// Checkable form of the integrability hypothesis `v ∈ L²(1/γ_β)`: the integrand
/// `v²/γ_β` must decrease outward at every edge of the grid and sit at least six
/// orders of magnitude below its peak there. Returns `∫ v²/γ_β dx` on the grid.
pub fn l2_weighted(v: &GridField, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let shape = *v.shape();
    let dim = shape.dim();
    let logs: Vec<f64> = (0..shape.len())
        .map(|i| {
            let x = shape.point(i);
            2.0 * v.log_at(&x[..dim]) - log_gaussian(&x[..dim], beta)
        })
        .collect();
    if logs.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
        return Err(Error::Integrability("v^2/gamma_beta is not finite on the grid".into()));
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let margin = 6.0 * core::f64::consts::LN_10;
    let bad = |edge: usize, inner: usize| {
        let e = logs[edge];
        e > f64::NEG_INFINITY && (e > top - margin || e >= logs[inner])
    };
    let failed = match shape {
        GridShape::Line(g) => {
            let n = g.len();
            bad(0, 1) || bad(n - 1, n - 2)
        }
        GridShape::Plane(a, b) => {
            let (na, nb) = (a.len(), b.len());
            (0..nb).any(|j| bad(j, nb + j) || bad((na - 1) * nb + j, (na - 2) * nb + j))
                || (0..na).any(|i| bad(i * nb, i * nb + 1) || bad(i * nb + nb - 1, i * nb + nb - 2))
        }
    };
    if failed {
        return Err(Error::Integrability("v^2/gamma_beta does not decay at the grid edge".into()));
    }
    Ok((0..shape.len()).map(|i| shape.weight(i) * exp(logs[i])).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gauss_hermite_rule, LogQuad, LogQuadMix};
    use alloc::vec;

    fn rule() -> QuadratureRule {
        gauss_hermite_rule(96).unwrap()
    }

    fn gauss_field(beta: f64) -> GridField {
        GridField::gaussian(GridShape::desk_line(), beta).unwrap()
    }

    /// `γ_β/γ` as a function.
    fn ratio_field(beta: f64) -> GridField {
        let lq = LogQuad::quadratic_1d(0.5 - 0.5 / beta, 0.0, -0.5 * libm::log(beta)).unwrap();
        GridField::from_log_quad(GridShape::desk_line(), LogQuadMix::single(lq)).unwrap()
    }

    #[test]
    fn constant_function_has_no_entropy() {
        let one = GridField::from_fn(GridShape::desk_line(), |_| 1.0).unwrap();
        let ef = entropy_fisher(&one, &rule()).unwrap();
        assert!(ef.entropy.abs() < 1e-14 && ef.fisher.abs() < 1e-14);
    }

    #[test]
    fn gaussian_ratios_match_closed_forms() {
        for beta in [0.25, 0.5, 2.0, 4.0] {
            let want_ent = 0.5 * (beta - 1.0 - libm::log(beta));
            let want_fisher = (1.0 - beta) * (1.0 - beta) / beta;
            for ef in [
                relative_entropy_fisher(&gauss_field(beta), &rule()).unwrap(),
                entropy_fisher(&ratio_field(beta), &rule()).unwrap(),
            ] {
                assert!((ef.entropy - want_ent).abs() < 1e-12, "beta={beta}");
                assert!((ef.fisher - want_fisher).abs() < 1e-12);
            }
            // the sampled route agrees to grid accuracy
            let s = relative_entropy_fisher(&gauss_field(beta).sampled_only(), &rule()).unwrap();
            assert!((s.entropy - want_ent).abs() < 1e-6 && (s.fisher - want_fisher).abs() < 1e-4);
        }
    }

    #[test]
    fn exponentials_are_lsi_extremisers() {
        for (a, b) in [(0.7, 0.2), (-1.3, 0.0)] {
            let f = GridField::from_fn(GridShape::desk_line(), move |x| libm::exp(a * x[0] + b)).unwrap();
            let ef = entropy_fisher(&f, &rule()).unwrap();
            assert!(ef.lsi_gap().abs() < 1e-10 * ef.mass);
        }
    }

    #[test]
    fn lp_norms() {
        let r = rule();
        let c = GridField::from_fn(GridShape::desk_line(), |_| 2.5).unwrap();
        for p in [-2.0, 0.5, 1.0, 3.0] {
            assert!((lp_norm_gaussian(&c, p, &r).unwrap() - 2.5).abs() < 1e-13);
        }
        let e = GridField::from_fn(GridShape::desk_line(), |x| libm::exp(x[0])).unwrap();
        assert!((lp_norm_gaussian(&e, 2.0, &r).unwrap() - core::f64::consts::E).abs() < 1e-12);
        assert!((lp_norm_gaussian(&ratio_field(2.0), 1.0, &r).unwrap() - 1.0).abs() < 1e-12);
        let neg = GridField::from_fn(GridShape::desk_line(), |x| x[0]).unwrap();
        assert!(matches!(lp_norm_gaussian(&neg, -1.0, &r), Err(Error::Positivity { .. })));
        let wild = GridField::from_log_quad(
            GridShape::desk_line(),
            LogQuadMix::single(LogQuad::quadratic_1d(0.3, 0.0, 0.0).unwrap()),
        )
        .unwrap();
        assert!(matches!(lp_norm_gaussian(&wild, 2.0, &r), Err(Error::Integrability(_))));
    }

    #[test]
    fn constants_arithmetic() {
        assert_eq!(lsi_gauss(1, 1.0).unwrap(), 0.0);
        assert!((talagrand_gauss(1, 4.0).unwrap() - (core::f64::consts::LN_2 - 1.0)).abs() < 1e-15);
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        let want = libm::pow(2.0, 0.25) * libm::pow(5.0 / 3.0, -0.375);
        assert!((hc_ratio(1, 2.0, &t).unwrap() - want).abs() < 1e-15);
        assert!((beckner_b(1, 1.5, 2.0).unwrap() - libm::cbrt(2.0) / libm::sqrt(5.0 / 3.0)).abs() < 1e-15);
        assert_eq!(beckner_b(1, 1.0, 3.0).unwrap(), 1.0);
        assert!((hj_t(1, 1.0, 2.0).unwrap() - libm::pow(libm::exp(-1.0) * 2.25, 0.25)).abs() < 1e-15);
        assert_eq!(hj_t(2, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(mikulincer(1, 1.0).unwrap(), 0.0);
        assert!((lsi_gauss(1, 2.0).unwrap() + 0.096_574).abs() < 1e-6);
    }

    #[test]
    fn mikulincer_is_continuous_across_the_series_switch() {
        for u in [9.9e-3, 1.01e-2, -9.9e-3, -1.01e-2] {
            let a = mikulincer(1, 1.0 + u).unwrap();
            let b = mikulincer(1, 1.0 + u * (1.0 + 1e-9)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!(mikulincer(1, 1.0 + 1e-7).unwrap().abs() < 1e-14);
    }

    #[test]
    fn talagrand_constant_improves_on_mikulincer() {
        for beta in [0.2, 0.5, 0.9] {
            assert!(talagrand_gauss(1, beta).unwrap() < mikulincer(1, beta).unwrap());
        }
    }

    #[test]
    fn sharp_constant_dispatch() {
        let mut p = ConstantParams::new(1, 2.0);
        assert!(sharp_constant(ConstantName::HcRatio, &p).is_err());
        p.exponents = Some((2.0, 4.0));
        let c = sharp_constant(ConstantName::HcRatio, &p).unwrap();
        assert_eq!(c.params["q"], 4.0);
        p.bl = Some((0.5, 0.75, 0.5 * libm::log(3.0)));
        let h = sharp_constant(ConstantName::BlH, &p).unwrap();
        assert!(h.value > 0.0 && !h.params.contains_key("beta"));
    }

    #[test]
    fn hc_moment_at_gaussian_is_the_ratio() {
        let r = rule();
        for (p, q) in [(2.0, 4.0), (1.5, 3.0), (3.0, 6.0)] {
            let t = ExponentTriple::from_pq(p, q).unwrap();
            for beta in [0.25, 0.5, 2.0, 4.0] {
                let lm = log_hc_moment(&|x| log_gaussian(x, beta), 1, &t, &r).unwrap();
                let got = libm::exp(lm / q);
                assert!((got - hc_ratio(1, beta, &t).unwrap()).abs() < 1e-12, "p={p} beta={beta}");
            }
        }
    }

    #[test]
    fn q_functional_is_flat_at_equilibrium() {
        let r = rule();
        let s = GridShape::desk_line();
        let beta = 2.0;
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        let v0 = MeasureSpec::Density(gauss_field(beta));
        let want = libm::pow(hc_ratio(1, beta, &t).unwrap(), 4.0);
        for time in [0.0, 0.5, 3.0] {
            assert!((q_functional(&v0, beta, &t, time, &s, &r).unwrap() - want).abs() < 1e-11);
        }
        assert!((q_functional_limit(1.0, 1, beta, &t).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn q_functional_increases_on_a_class_member() {
        let r = rule();
        let s = GridShape::desk_line();
        let beta = 2.0;
        let t = ExponentTriple::from_pq(2.0, 4.0).unwrap();
        let atoms = MeasureSpec::Discrete { points: vec![vec![-1.5], vec![2.0]], weights: vec![0.3, 0.7] };
        let (v0, _) = crate::flows::fp_class_member(&atoms, beta, &s, &r).unwrap();
        let v0 = MeasureSpec::Density(v0);
        let q: Vec<f64> =
            [0.0, 5.0, 20.0].iter().map(|&time| q_functional(&v0, beta, &t, time, &s, &r).unwrap()).collect();
        assert!(q[0] <= q[1] * (1.0 + 1e-12) && q[1] <= q[2] * (1.0 + 1e-12), "{q:?}");
        let limit = q_functional_limit(1.0, 1, beta, &t).unwrap();
        assert!((q[2] - limit).abs() < 1e-9 * limit);
    }

    #[test]
    fn gross_slope_at_and_near_the_extremiser() {
        let r = rule();
        let beta = 2.0;
        let h = 1e-3;
        let g = gross_slope(&gauss_field(beta), beta, h, &r).unwrap();
        assert!(g.slope.abs() < 5.0 * h * h.max(1e-3));
        // ψ'(0) is half the Gaussian LSI deficit
        assert!((g.psi_prime - 0.5 * lsi_gauss(1, beta).unwrap()).abs() < 5.0 * h);
        assert!(g.predicted.abs() < 1e-5);
        let atoms = MeasureSpec::Discrete { points: vec![vec![-1.0], vec![1.8]], weights: vec![0.5, 0.5] };
        let (v, _) = crate::flows::fp_class_member(&atoms, beta, &GridShape::desk_line(), &r).unwrap();
        let g = gross_slope(&v, beta, h, &r).unwrap();
        assert!(g.slope <= 1e-3);
        assert!((g.slope - g.predicted).abs() < 1e-3);
    }

    #[test]
    fn weighted_l2_hypothesis() {
        let beta = 2.0;
        let ok = l2_weighted(&gauss_field(beta), beta).unwrap();
        assert!((ok - 1.0).abs() < 1e-8);
        // γ_a with a ≥ 2β is not in L²(1/γ_β)
        assert!(matches!(l2_weighted(&gauss_field(4.5), beta), Err(Error::Integrability(_))));
        let shifted = LogQuadMix::gaussian_mixture(1, &[vec![1.0]], &[1.0], beta).unwrap();
        assert!(l2_weighted(&GridField::from_log_quad(GridShape::desk_line(), shifted).unwrap(), beta).is_ok());
    }
}
