//! Hopf–Lax infimal convolution, its vanishing-viscosity approximation and the
//! Hamilton–Jacobi forms of hypercontractivity and of the dual transport inequality.

use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::functionals::hj_t;
use crate::inequalities::{DeficitReport, Sense};
use crate::math::{exp, floor, ln, log_sum_exp, sqrt, LN_2PI};
use crate::numerics::{second_line, Grid1D, GridField, GridShape};
use crate::semigroups::mehler;

/// Grid points excluded at each end when checking second-derivative bounds.
const EDGE: usize = 2;
/// Golden-section iterations for the local refinement of each minimiser.
const REFINE_STEPS: usize = 80;
/// Kernel half-width, in standard deviations, for the viscous approximation.
const KERNEL_WINDOW: f64 = 40.0;
/// Log-decay of an integrand at the grid edges required for the integrability proxy.
const EDGE_DECAY: f64 = 20.0;

/// A real-valued initial datum on a line grid with its measured regularity.
#[derive(Clone, Debug)]
pub struct HJField {
    f: GridField,
    lipschitz_estimate: f64,
    lower_bound: f64,
}

impl HJField {
    /// Measures the grid Lipschitz constant and the smallest `C ≥ 0` with
    /// `f(x) ≥ -C(1 + |x|)` on the grid.
    pub fn new(f: GridField) -> Result<Self> {
        let g = *f.grid()?;
        let v = f.values();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("initial datum must be finite on the grid".into()));
        }
        let h = g.spacing();
        let lipschitz_estimate = v.windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max);
        let lower_bound = g.points().zip(v).map(|(x, y)| -y / (1.0 + x.abs())).fold(0.0, f64::max);
        Ok(Self { f, lipschitz_estimate, lower_bound })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::new(GridField::from_fn(GridShape::Line(grid), move |x| f(x[0]))?)
    }

    pub fn field(&self) -> &GridField {
        &self.f
    }
    pub fn grid(&self) -> Grid1D {
        *self.f.grid().expect("line grid checked on construction")
    }
    pub fn lipschitz_estimate(&self) -> f64 {
        self.lipschitz_estimate
    }
    /// `C` in `f(x) ≥ -C(1 + |x|)`.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Smallest `f'' - level` over interior points.
    pub fn second_derivative_margin(&self, level: f64) -> f64 {
        let g = self.grid();
        let d2 = second_line(self.f.values(), g.spacing());
        d2[EDGE..g.len() - EDGE].iter().map(|v| v - level).fold(f64::INFINITY, f64::min)
    }

    /// `log ∫ e^{r f} dγ` on the grid.
    pub fn log_exp_moment(&self, r: f64) -> f64 {
        log_exp_moment(&self.grid(), self.f.values(), r)
    }
}

/// `log ∫ e^{r u} dγ` for samples `u` on `g`, by the trapezoid rule in the log domain.
fn log_exp_moment(g: &Grid1D, u: &[f64], r: f64) -> f64 {
    log_sum_exp((0..g.len()).map(|i| {
        let x = g.point(i);
        r * u[i] - 0.5 * x * x - 0.5 * LN_2PI + ln(g.trapezoid_weight(i))
    }))
}

/// `‖e^u‖_{L^r(γ)} = (∫ e^{r u} dγ)^{1/r}`, also for `r < 1`.
fn exp_norm(g: &Grid1D, u: &[f64], r: f64) -> f64 {
    exp(log_exp_moment(g, u, r) / r)
}

fn golden_min(lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> (f64, f64) {
    let ratio = 0.5 * (sqrt(5.0) - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..REFINE_STEPS {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - ratio * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + ratio * (b - a);
            gd = g(d);
        }
    }
    if gc < gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// `Q_τ f(x) = inf_y {f(y) + |x - y|²/(2τ)}` at every grid point.
///
/// The search runs over all grid points, then refines around the best one with the
/// field's evaluator. Beyond the grid `f` continues linearly from its edge values with
/// slope `-C`, which stays above the lower bound `-C(1 + |y|)`.
pub fn hopf_lax(f: &HJField, tau: f64) -> Result<GridField> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(param("tau must be positive"));
    }
    let g = f.grid();
    let v = f.f.values();
    let n = g.len();
    let c = f.lower_bound;
    let cost = |x: f64, y: f64| (x - y) * (x - y) / (2.0 * tau);
    let out =
        (0..n)
            .map(|i| {
                let x = g.point(i);
                let (j, mut best) = (0..n)
                    .map(|j| (j, v[j] + cost(x, g.point(j))))
                    .fold((0, f64::INFINITY), |acc, t| if t.1 < acc.1 { t } else { acc });
                let lo = g.point(j.saturating_sub(1));
                let hi = g.point((j + 1).min(n - 1));
                let (_, refined) = golden_min(lo, hi, |y| f.f.value_at(&[y]) + cost(x, y));
                best = best.min(refined);
                let right = (x + c * tau).max(g.hi());
                let left = (x - c * tau).min(g.lo());
                let beyond_right = v[n - 1] - c * (right - g.hi()) + cost(x, right);
                let beyond_left = v[0] - c * (g.lo() - left) + cost(x, left);
                best.min(beyond_right).min(beyond_left)
            })
            .collect();
    GridField::from_values(GridShape::Line(g), out)
}

/// `u^ε_τ = -2ε log P_{ετ}[e^{-f/(2ε)}]` with the Ornstein–Uhlenbeck semigroup,
/// evaluated in the log domain.
pub fn vanishing_viscosity(f: &HJField, eps: f64, tau: f64) -> Result<GridField> {
    if !(eps > 0.0 && tau > 0.0 && eps.is_finite() && tau.is_finite()) {
        return Err(param("viscosity and time must be positive"));
    }
    let g = f.grid();
    let v = f.f.values();
    let (decay, noise) = mehler(eps * tau);
    let width = KERNEL_WINDOW * sqrt(noise);
    let h = g.spacing();
    let norm = -0.5 * (LN_2PI + ln(noise));
    let out: Vec<f64> = (0..g.len())
        .map(|i| {
            let centre = decay * g.point(i);
            let lo = floor((centre - width - g.lo()) / h).max(0.0) as usize;
            let hi = ((floor((centre + width - g.lo()) / h) + 1.0).max(0.0) as usize).min(g.len() - 1);
            let lse = log_sum_exp((lo..=hi).map(|j| {
                let y = g.point(j);
                -v[j] / (2.0 * eps) - (y - centre) * (y - centre) / (2.0 * noise) + ln(g.trapezoid_weight(j))
            }));
            -2.0 * eps * (lse + norm)
        })
        .collect();
    if out.iter().any(|u| !u.is_finite()) {
        return Err(Error::Integrability("viscous approximation overflowed".into()));
    }
    GridField::from_values(GridShape::Line(g), out)
}

/// Distances between `u^ε_τ` and `Q_τ f` on `|x| ≤ window` for a decreasing sequence of `ε`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ViscosityTrace {
    pub eps: Vec<f64>,
    /// `max |u^ε_τ - Q_τ f|`.
    pub gaps: Vec<f64>,
    /// `max (u^ε_τ - Q_τ f)`; the one-sided form of the limit.
    pub excess: Vec<f64>,
}

impl ViscosityTrace {
    pub fn decreasing(&self) -> bool {
        self.gaps.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn viscosity_trace(f: &HJField, eps: &[f64], tau: f64, window: f64) -> Result<ViscosityTrace> {
    let q = hopf_lax(f, tau)?;
    let g = f.grid();
    let mut trace = ViscosityTrace { eps: eps.to_vec(), gaps: Vec::new(), excess: Vec::new() };
    for &e in eps {
        let u = vanishing_viscosity(f, e, tau)?;
        let diffs: Vec<f64> =
            (0..g.len()).filter(|i| g.point(*i).abs() <= window).map(|i| u.values()[i] - q.values()[i]).collect();
        trace.gaps.push(diffs.iter().map(|d| d.abs()).fold(0.0, f64::max));
        trace.excess.push(diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(trace)
}

/// `β(a)` from `1/β(a) = 1 - a(1 - 1/β)`; requires `a(1 - 1/β) < 1`.
pub fn beta_of_a(a: f64, beta: f64) -> Result<f64> {
    if !(a > 0.0 && beta >= 1.0 && a.is_finite() && beta.is_finite()) {
        return Err(param("need a > 0 and beta >= 1"));
    }
    let inv = 1.0 - a * (1.0 - 1.0 / beta);
    if !(inv > 0.0) {
        return Err(param("beta(1 - 1/a) must be below 1"));
    }
    Ok(1.0 / inv)
}

/// `‖e^{Q_τ[(1/a) log(γ_{β(a)}/γ)]}‖_{L^{a+τ}(γ)}` in dimension `n`, in closed form.
pub fn hj_constant(n: usize, a: f64, tau: f64, beta: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(param("tau must be positive"));
    }
    let alpha = beta_of_a(a, beta)?;
    let delta = tau * (1.0 - 1.0 / beta);
    let base = (a / tau + 1.0) / (delta + 1.0) - a / tau;
    let n = n as f64;
    Ok(exp(-n / (2.0 * a) * ln(alpha) - n / (2.0 * (a + tau)) * ln(base)))
}

/// `(1/a) log(γ_{β(a)}/γ) = ½(1 - 1/β)x² - (1/(2a)) log β(a)`.
pub fn hc_extremiser(grid: Grid1D, a: f64, beta: f64) -> Result<HJField> {
    let alpha = beta_of_a(a, beta)?;
    let c = 1.0 - 1.0 / beta;
    let shift = ln(alpha) / (2.0 * a);
    HJField::from_fn(grid, move |x| 0.5 * c * x * x - shift)
}

/// `½(1 - 1/β)(x² - 1)`, for which the dual inequality is an equality.
pub fn dual_extremiser(grid: Grid1D, beta: f64) -> Result<HJField> {
    let c = 1.0 - 1.0 / beta;
    HJField::from_fn(grid, move |x| 0.5 * c * (x * x - 1.0))
}

/// Tolerance on the second-derivative hypothesis, absorbing rounding in the
/// finite differences.
const CURVATURE_TOL: f64 = 1e-6;

fn curvature_hypothesis(report: DeficitReport, f: &HJField, beta: f64) -> DeficitReport {
    let m = f.second_derivative_margin(1.0 - 1.0 / beta);
    report.hypothesis("uniformly-subharmonic", m >= -CURVATURE_TOL, m)
}

/// Edge decay of `log(e^{2af} γ/γ_{β(a)} · γ)`, as a proxy for its integrability.
fn integrability_margin(f: &HJField, a: f64, beta_a: f64) -> f64 {
    let g = f.grid();
    let v = f.f.values();
    let log_int = |i: usize| {
        let x = g.point(i);
        2.0 * a * v[i] - x * x + 0.5 * x * x / beta_a + 0.5 * ln(beta_a)
    };
    let peak = (0..g.len()).map(log_int).fold(f64::NEG_INFINITY, f64::max);
    let edge = log_int(0).max(log_int(g.len() - 1));
    peak - edge - EDGE_DECAY
}

/// `‖e^{Q_τ f}‖_{L^{a+τ}(γ)} ≤ hj_constant(a, τ, β) ‖e^f‖_{L^a(γ)}` for data with
/// `f'' ≥ 1 - 1/β` and the linear lower bound.
pub fn hj_hc_check(f: &HJField, a: f64, tau: f64, beta: f64) -> Result<DeficitReport> {
    let beta_a = beta_of_a(a, beta)?;
    let constant = hj_constant(1, a, tau, beta)?;
    let q = hopf_lax(f, tau)?;
    let g = f.grid();
    let lhs = exp_norm(&g, q.values(), a + tau);
    let base = exp_norm(&g, f.f.values(), a);
    let report = DeficitReport::new("hj-hc", lhs, constant * base, constant, Sense::AtMost)
        .param("a", a)
        .param("tau", tau)
        .param("beta", beta)
        .param("beta_a", beta_a)
        .param("initial_norm", base)
        .param("lipschitz", f.lipschitz_estimate)
        .hypothesis("linear-lower-bound", f.lower_bound.is_finite(), f.lower_bound);
    let m = integrability_margin(f, a, beta_a);
    Ok(curvature_hypothesis(report, f, beta).hypothesis("integrability", m >= 0.0, m))
}

/// Values of `a` at which the small-`a` hypotheses of the dual inequality are checked.
pub const DUAL_SMALL_A: [f64; 2] = [0.01, 0.005];

/// `‖e^{Q_τ f}‖_{L^τ(γ)} ≤ T(τ, β) e^{∫ f dγ}`; `β = 1` is the classical dual form.
pub fn dual_talagrand_check(f: &HJField, tau: f64, beta: f64) -> Result<DeficitReport> {
    let constant = hj_t(1, tau, beta)?;
    if beta < 1.0 {
        return Err(param("the dual inequality needs beta >= 1"));
    }
    let q = hopf_lax(f, tau)?;
    let g = f.grid();
    let lhs = exp_norm(&g, q.values(), tau);
    let gauss = GridField::gaussian(GridShape::Line(g), 1.0)?;
    let mean: f64 = (0..g.len()).map(|i| f.f.values()[i] * gauss.values()[i] * g.trapezoid_weight(i)).sum();
    let finite_a = hj_constant(1, DUAL_SMALL_A[0], tau, beta)?;
    let mut report = DeficitReport::new("dual-talagrand", lhs, constant * exp(mean), constant, Sense::AtMost)
        .param("tau", tau)
        .param("beta", beta)
        .param("mean", mean)
        .param("constant_at_small_a", finite_a)
        .param("limit_gap", (finite_a - constant).abs())
        .hypothesis("linear-lower-bound", f.lower_bound.is_finite(), f.lower_bound);
    if beta > 1.0 {
        report = curvature_hypothesis(report, f, beta);
        for a in DUAL_SMALL_A {
            let m = integrability_margin(f, a, beta_of_a(a, beta)?);
            report = report.hypothesis(alloc::format!("integrability-a-{a}"), m >= 0.0, m);
        }
    }
    Ok(report)
}
