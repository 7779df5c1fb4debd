//! One-dimensional quadratic transport: quantile maps, `W₂`, transport-entropy deficits,
//! contraction bounds, a log-Sobolev deficit for convex potentials and the triangular
//! (marginal then conditional) coupling in two dimensions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::flows::{certify, covariance, CertificateKind, ConvexityCertificate, NORMALIZATION_TOL};
use crate::functionals::{mikulincer, relative_entropy_fisher, talagrand_gauss, ENTROPY_FLOOR};
use crate::math::{exp, ln, log_sum_exp, sqrt};
use crate::numerics::{diff_line, second_line, Grid1D, GridField, GridShape, QuadratureRule};
use crate::report::{DeficitReport, Sense};

/// Quantile levels below this (on either side) are excluded from slope and residual checks.
pub const QUANTILE_CLIP: f64 = 1e-7;

/// Probability density on a line with its cumulative and survival functions.
#[derive(Clone, Debug)]
pub struct DensitySpec {
    field: GridField,
    /// `1 / ∫ f`, applied to every sample.
    scale: f64,
    mass: f64,
    cdf: Vec<f64>,
    sf: Vec<f64>,
}

impl DensitySpec {
    /// Density whose integral is 1 within [`NORMALIZATION_TOL`].
    pub fn new(field: GridField) -> Result<Self> {
        let spec = Self::normalized(field)?;
        if (spec.mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { mass: spec.mass });
        }
        Ok(spec)
    }

    /// Any non-negative integrable field, rescaled to unit mass.
    pub fn normalized(field: GridField) -> Result<Self> {
        let g = *field.grid()?;
        if let Some(i) = field.values().iter().position(|v| *v < 0.0) {
            return Err(Error::Positivity { index: i, value: field.values()[i] });
        }
        let (cdf, sf) = cumulative(field.values(), g.spacing());
        let mass = cdf[cdf.len() - 1];
        if !(mass > 0.0) {
            return Err(Error::Normalization { mass });
        }
        let scale = 1.0 / mass;
        let cdf = cdf.into_iter().map(|c| c * scale).collect();
        let sf = sf.into_iter().map(|c| c * scale).collect();
        Ok(Self { field, scale, mass, cdf, sf })
    }

    /// `γ_var` centred at `mean`.
    pub fn gaussian(grid: Grid1D, mean: f64, var: f64) -> Result<Self> {
        let f = GridField::gaussian(GridShape::Line(grid), var)?;
        Self::new(if mean == 0.0 { f } else { f.translated(&[mean])? })
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn grid(&self) -> &Grid1D {
        match self.field.shape() {
            GridShape::Line(g) => g,
            GridShape::Plane(..) => unreachable!("checked at construction"),
        }
    }

    /// Mass before normalization.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Normalized density at grid point `k`.
    pub fn density(&self, k: usize) -> f64 {
        self.field.values()[k] * self.scale
    }

    /// Normalized density at an arbitrary point.
    pub fn density_at(&self, x: f64) -> f64 {
        self.field.value_at(&[x]) * self.scale
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// `∫_x^∞`, accumulated from the right so small upper tails keep their precision.
    pub fn sf(&self) -> &[f64] {
        &self.sf
    }

    /// `∫ h dν` by the trapezoid rule.
    pub fn expect(&self, h: impl Fn(f64) -> f64) -> f64 {
        let g = self.grid();
        (0..g.len()).map(|k| g.trapezoid_weight(k) * self.density(k) * h(g.point(k))).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    /// Point `y` with `∫_{-∞}^y = level` (`from_left`) or `∫_y^∞ = level`.
    pub fn quantile(&self, level: f64, from_left: bool) -> f64 {
        let g = self.grid();
        let h = g.spacing();
        let n = g.len();
        // both sides are inverted as increasing functions: F, or -S
        let (vals, target): (&[f64], f64) = if from_left { (&self.cdf, level) } else { (&self.sf, -level) };
        let at = |k: usize| if from_left { vals[k] } else { -vals[k] };
        let k = if from_left {
            vals.partition_point(|c| *c <= target).saturating_sub(1)
        } else {
            vals.partition_point(|c| -*c <= target).saturating_sub(1)
        }
        .min(n - 2);
        let (y0, y1) = (at(k), at(k + 1));
        let (d0, d1) = (h * self.density(k), h * self.density(k + 1));
        let theta = invert_hermite(y0, y1, d0, d1, target);
        g.point(k) + theta * h
    }

    fn tail_level(&self, k: usize) -> (f64, bool) {
        if self.cdf[k] <= self.sf[k] {
            (self.cdf[k], true)
        } else {
            (self.sf[k], false)
        }
    }
}

/// Mass beyond an edge sample `f0` whose neighbours inward are `f1, f2`: the asymptotic
/// tail series in the local decay rate `r` and log-curvature `c`,
/// `f0/r · (1 + c/r² + 3c²/r⁴)`. Zero when the samples do not decay outward.
fn edge_tail(f0: f64, f1: f64, f2: f64, h: f64) -> f64 {
    if !(f0 > 0.0 && f1 > 0.0 && f2 > 0.0) {
        return 0.0;
    }
    let (l0, l1, l2) = (ln(f0), ln(f1), ln(f2));
    let rate = (-3.0 * l0 + 4.0 * l1 - l2) / (2.0 * h);
    if !(rate > 0.0) {
        return 0.0;
    }
    let curv = (l0 - 2.0 * l1 + l2) / (h * h);
    let u = curv / (rate * rate);
    let series = 1.0 + u + 3.0 * u * u;
    if series.is_finite() && series > 0.5 && series < 2.0 {
        f0 / rate * series
    } else {
        f0 / rate
    }
}

/// Left and right cumulative integrals with fourth-order cells, starting from the
/// estimated mass beyond each edge.
fn cumulative(f: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let cell = |k: usize| {
        let trap = 0.5 * h * (f[k] + f[k + 1]);
        let c = if n < 4 {
            trap
        } else if k == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if k + 2 == n {
            h / 24.0 * (f[k - 2] - 5.0 * f[k - 1] + 19.0 * f[k] + 9.0 * f[k + 1])
        } else {
            h / 24.0 * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2])
        };
        if c >= 0.0 {
            c
        } else {
            trap
        }
    };
    let cells: Vec<f64> = (0..n - 1).map(cell).collect();
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    left[0] = edge_tail(f[0], f[1], f[2], h);
    right[n - 1] = edge_tail(f[n - 1], f[n - 2], f[n - 3], h);
    for k in 0..n - 1 {
        left[k + 1] = left[k] + cells[k];
    }
    for k in (0..n - 1).rev() {
        right[k] = right[k + 1] + cells[k];
    }
    (left, right)
}

/// Solve `H(θ) = target` on `[0, 1]` for the cubic Hermite interpolant with end values
/// `y0, y1` and end slopes `d0, d1`; Newton with a bisection fallback.
fn invert_hermite(y0: f64, y1: f64, d0: f64, d1: f64, target: f64) -> f64 {
    if !(y1 > y0) {
        return 0.0;
    }
    if target <= y0 {
        return 0.0;
    }
    if target >= y1 {
        return 1.0;
    }
    let eval = |t: f64| {
        let t2 = t * t;
        let t3 = t2 * t;
        let v =
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1;
        let dv = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1;
        (v, dv)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut t = (target - y0) / (y1 - y0);
    for _ in 0..100 {
        let (v, dv) = eval(t);
        let r = v - target;
        if r < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = if dv > 0.0 { t - r / dv } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() < 1e-15 || hi - lo < 1e-15 {
            return next;
        }
        t = next;
    }
    t
}

/// Monotone map pushing `source` onto `target`, sampled on the source grid.
#[derive(Clone, Debug)]
pub struct QuantileMap {
    pub source: DensitySpec,
    pub target: DensitySpec,
    pub map_values: Vec<f64>,
    /// Finite-difference derivative of the map.
    pub slopes: Vec<f64>,
    /// Points whose quantile level lies inside `[QUANTILE_CLIP, 1 - QUANTILE_CLIP]`.
    pub resolved: Vec<bool>,
    /// `max |μ(x) - ν(T(x)) T'(x)| / max μ` over resolved interior points.
    pub ma_residual: f64,
}

impl QuantileMap {
    /// `∫ h(T(x)) dμ(x)`.
    pub fn push_forward(&self, h: impl Fn(f64) -> f64) -> f64 {
        let g = self.source.grid();
        (0..g.len()).map(|k| g.trapezoid_weight(k) * self.source.density(k) * h(self.map_values[k])).sum()
    }

    /// `∫ |x - T(x)|² dμ(x)`.
    pub fn cost(&self) -> f64 {
        let g = self.source.grid();
        (0..g.len())
            .map(|k| {
                let d = g.point(k) - self.map_values[k];
                g.trapezoid_weight(k) * self.source.density(k) * d * d
            })
            .sum()
    }

    /// Largest slope over resolved interior points.
    pub fn max_slope(&self) -> f64 {
        self.interior().map(|k| self.slopes[k]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_slope(&self) -> f64 {
        self.interior().map(|k| self.slopes[k]).fold(f64::INFINITY, f64::min)
    }

    fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.map_values.len();
        (1..n - 1).filter(move |k| self.resolved[*k] && self.resolved[k - 1] && self.resolved[k + 1])
    }
}

/// `T = F_ν^{-1} ∘ F_μ`, inverting whichever tail is smaller.
pub fn brenier_1d(mu: &DensitySpec, nu: &DensitySpec) -> Result<QuantileMap> {
    let g = *mu.grid();
    let n = g.len();
    let mut map_values = Vec::with_capacity(n);
    let mut resolved = Vec::with_capacity(n);
    for k in 0..n {
        let (level, from_left) = mu.tail_level(k);
        map_values.push(nu.quantile(level, from_left));
        resolved.push(mu.cdf[k] >= QUANTILE_CLIP && mu.sf[k] >= QUANTILE_CLIP);
    }
    if map_values.windows(2).any(|w| w[1] < w[0] - 1e-12 * (1.0 + w[0].abs())) {
        return Err(Error::Reconstruction("quantile map is not monotone".into()));
    }
    let slopes = diff_line(&map_values, g.spacing());
    let top = (0..n).map(|k| mu.density(k)).fold(0.0, f64::max);
    let mut map =
        QuantileMap { source: mu.clone(), target: nu.clone(), map_values, slopes, resolved, ma_residual: 0.0 };
    let residual = map
        .interior()
        .map(|k| (mu.density(k) - nu.density_at(map.map_values[k]) * map.slopes[k]).abs())
        .fold(0.0, f64::max);
    map.ma_residual = residual / top;
    Ok(map)
}

/// Quadratic Wasserstein distance through the quantile map.
pub fn w2(mu: &DensitySpec, nu: &DensitySpec) -> Result<f64> {
    Ok(sqrt(brenier_1d(mu, nu)?.cost()))
}

/// Centre `v`, returning the centred density and the mean removed.
fn centred(v: &DensitySpec) -> Result<(DensitySpec, f64)> {
    let mean = v.mean();
    if mean.abs() < 1e-14 {
        return Ok((v.clone(), mean));
    }
    Ok((DensitySpec::normalized(v.field().translated(&[-mean])?)?, mean))
}

/// `½ W₂(γ, v)² - Ent_γ(v/γ)` against `n(1 + ½ log β - √β)`.
///
/// For `β > 1` the hypotheses are `0 ≥ (log v)'' ≥ -1/β`; for `β < 1`,
/// `(log v)'' ≤ -1/β`; `β = 1` is the classical inequality and needs none. The input is
/// centred first; the mean removed is recorded as `mean_shift`. For `β < 1` the
/// corresponding mean-zero bound with constant `mikulincer(β)` is recorded as well.
pub fn talagrand_deficit(v: &DensitySpec, beta: f64, rule: &QuadratureRule) -> Result<DeficitReport> {
    let constant = talagrand_gauss(1, beta)?;
    let (vc, shift) = centred(v)?;
    let gauss = DensitySpec::gaussian(*vc.grid(), 0.0, 1.0)?;
    let cost = brenier_1d(&gauss, &vc)?.cost();
    let ent = relative_entropy_fisher(vc.field(), rule)?.entropy;
    let lhs = 0.5 * cost - ent;
    let mut report = DeficitReport::new("talagrand", lhs, constant, constant, Sense::AtMost)
        .param("beta", beta)
        .param("w2_squared", cost)
        .param("entropy", ent)
        .param("mean_shift", shift);
    if beta > 1.0 {
        let lower = certify(vc.field(), CertificateKind::Convex, beta, None)?;
        let upper = certify(vc.field(), CertificateKind::Concave, f64::INFINITY, None)?;
        report = report.hypothesis("semi-log-convex", lower.passed, lower.margin).hypothesis(
            "log-concave",
            upper.passed,
            upper.margin,
        );
    } else if beta < 1.0 {
        let c = certify(vc.field(), CertificateKind::Concave, beta, None)?;
        let var = covariance(vc.field())?[0][0];
        report = report
            .hypothesis("semi-log-concave", c.passed, c.margin)
            .param("mikulincer_bound", mikulincer(1, beta)?)
            .param("variance", var);
    }
    Ok(report)
}

/// Slope bound for the map from `γ` onto a semi-log-concave density.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContractionCheck {
    pub max_slope: f64,
    /// `√β`.
    pub bound: f64,
    pub certificate: ConvexityCertificate,
    pub passed: bool,
}

/// `max T' ≤ √β + tol` for `T` the quantile map from `γ` onto `v`; `v` must be
/// certified `β`-semi-log-concave.
pub fn caffarelli_check(v: &DensitySpec, beta: f64, tol: f64) -> Result<ContractionCheck> {
    let certificate = certify(v.field(), CertificateKind::Concave, beta, None)?;
    if !certificate.passed {
        return Err(Error::Hypothesis(alloc::format!(
            "density is not {beta}-semi-log-concave (margin {:e})",
            certificate.margin
        )));
    }
    let gauss = DensitySpec::gaussian(*v.grid(), 0.0, 1.0)?;
    let max_slope = brenier_1d(&gauss, v)?.max_slope();
    let bound = sqrt(beta);
    Ok(ContractionCheck { max_slope, bound, certificate, passed: max_slope <= bound + tol })
}

/// Convex potential `V` with reference measure `Z^{-1} e^{-V} dx`.
#[derive(Clone, Debug)]
pub struct PotentialSpec {
    potential: GridField,
    k: f64,
    l: f64,
    log_z: f64,
    symmetric: bool,
    first: Vec<f64>,
    second: Vec<f64>,
}

/// Asymmetry below this counts as symmetric.
const SYMMETRY_TOL: f64 = 1e-10;

impl PotentialSpec {
    /// `k` and `l` are the claimed bounds on `V''`; they are checked in reports, not here.
    pub fn new(potential: GridField, k: f64, l: f64) -> Result<Self> {
        let g = *potential.grid()?;
        if !(k > 0.0 && l >= k && l.is_finite()) {
            return Err(param("convexity bounds need 0 < K <= L < inf"));
        }
        let h = g.spacing();
        let v = potential.values();
        let log_z = log_sum_exp((0..g.len()).map(|i| ln(g.trapezoid_weight(i)) - v[i]));
        let symmetric = asymmetry(&g, v) <= SYMMETRY_TOL * (1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        Ok(Self { first: diff_line(v, h), second: second_line(v, h), potential, k, l, log_z, symmetric })
    }

    pub fn potential(&self) -> &GridField {
        &self.potential
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn l(&self) -> f64 {
        self.l
    }
    /// `log ∫ e^{-V} dx` on the grid.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }
    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    /// `min(V'' - K, L - V'')` over interior points.
    pub fn convexity_margin(&self) -> f64 {
        let n = self.second.len();
        self.second[2..n - 2].iter().map(|s| (s - self.k).min(self.l - s)).fold(f64::INFINITY, f64::min)
    }

    /// `Z_β^{-1} e^{-V/β}` sampled on the grid.
    pub fn tilted(&self, beta: f64) -> Vec<f64> {
        let g = self.potential.grid().expect("one-dimensional");
        let v = self.potential.values();
        let log_zb = log_sum_exp((0..g.len()).map(|i| ln(g.trapezoid_weight(i)) - v[i] / beta));
        v.iter().map(|x| exp(-x / beta - log_zb)).collect()
    }
}

/// `max |f(x) - f(-x)|` over mirrored grid points, infinite on an asymmetric grid.
fn asymmetry(g: &Grid1D, f: &[f64]) -> f64 {
    if (g.lo() + g.hi()).abs() > 1e-12 * g.hi().abs().max(1.0) {
        return f64::INFINITY;
    }
    let n = f.len();
    (0..n / 2).map(|k| (f[k] - f[n - 1 - k]).abs()).fold(0.0, f64::max)
}

/// Boundary value of `|V'| v` above which the tail hypothesis fails.
const TAIL_FLUX_TOL: f64 = 1e-8;

/// Log-Sobolev deficit relative to `𝔪 = Z^{-1} e^{-V}` for `β > 1`.
///
/// `lhs = Ent_𝔪(v/𝔪) - I_𝔪(v/𝔪)/(2K)`; `rhs` is the same at `𝔪_β ∝ e^{-V/β}` plus
/// `(1 - 1/β)(L - K)/K`. The sharper correction `(1 - 1/β)∫ (V''/K)(v - 𝔪_β)` is recorded
/// in `params` as `fine_correction`, with its slack as `fine_slack`.
pub fn general_lsi_deficit(v: &DensitySpec, pot: &PotentialSpec, beta: f64) -> Result<DeficitReport> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(param("beta must exceed 1"));
    }
    let g = *v.grid();
    if pot.potential.shape() != v.field().shape() {
        return Err(param("density and potential must share a grid"));
    }
    let n = g.len();
    let h = g.spacing();
    let k = pot.k;
    let vp = pot.potential.values();
    let dens: Vec<f64> = (0..n).map(|i| v.density(i)).collect();
    let logs: Vec<f64> = match v.field().analytic() {
        Some(_) => (0..n).map(|i| v.field().log_at(&[g.point(i)]) + ln(v.scale)).collect(),
        None => dens.iter().map(|d| ln(d.max(ENTROPY_FLOOR))).collect(),
    };
    let dlog: Vec<f64> = match v.field().analytic() {
        Some(_) => (0..n).map(|i| v.field().grad_log_at(&[g.point(i)])[0]).collect(),
        None => diff_line(&logs, h),
    };
    let w = |i: usize| g.trapezoid_weight(i);

    let mut mass = 0.0;
    let mut ent = 0.0;
    let mut fisher = 0.0;
    for i in 0..n {
        if dens[i] < ENTROPY_FLOOR {
            continue;
        }
        let wi = w(i) * dens[i];
        mass += wi;
        ent += wi * (logs[i] + vp[i] + pot.log_z);
        let score = dlog[i] + pot.first[i];
        fisher += wi * score * score;
    }
    ent -= mass * ln(mass);

    let tilt = pot.tilted(beta);
    let c = 1.0 - 1.0 / beta;
    let log_zb = log_sum_exp((0..n).map(|i| ln(w(i)) - vp[i] / beta));
    let mut ent_b = 0.0;
    let mut fisher_b = 0.0;
    let mut fine = 0.0;
    for i in 0..n {
        let wi = w(i) * tilt[i];
        ent_b += wi * (c * vp[i] + pot.log_z - log_zb);
        fisher_b += wi * c * c * pot.first[i] * pot.first[i];
        fine += w(i) * pot.second[i] / k * (dens[i] - tilt[i]);
    }
    fine *= c;

    let lhs = ent - fisher / (2.0 * k);
    let base = ent_b - fisher_b / (2.0 * k);
    let correction = c * (pot.l - k) / k;
    let rhs = base + correction;

    let convex = pot.convexity_margin();
    let convex_tol = 1e-5 * k;
    let sym = asymmetry(&g, &dens).max(asymmetry(&g, vp));
    let lower = certify(v.field(), CertificateKind::Convex, beta / k, None)?;
    let flux = (pot.first[0] * dens[0]).abs().max((pot.first[n - 1] * dens[n - 1]).abs());
    Ok(DeficitReport::new("general-lsi", lhs, rhs, base, Sense::AtMost)
        .hypothesis("potential-convexity", convex >= -convex_tol, convex)
        .hypothesis("symmetric", sym <= SYMMETRY_TOL, -sym)
        .hypothesis("log-density-lower-bound", lower.passed, lower.margin)
        .hypothesis("tail-flux", flux <= TAIL_FLUX_TOL, TAIL_FLUX_TOL - flux)
        .param("beta", beta)
        .param("k", k)
        .param("l", pot.l)
        .param("entropy", ent)
        .param("fisher", fisher)
        .param("correction", correction)
        .param("fine_correction", fine)
        .param("fine_slack", base + fine - lhs))
}

/// Cost of the triangular coupling from `γ` onto a planar density: the marginal map on
/// the first axis, then conditional maps on the second axis along sampled rows.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TriangularCost {
    pub marginal: f64,
    pub conditional: f64,
    pub slices: usize,
}

impl TriangularCost {
    pub fn total(&self) -> f64 {
        self.marginal + self.conditional
    }
}

/// Number of conditional rows sampled in [`triangular_cost`].
pub const CONDITIONAL_SLICES: usize = 65;

/// Rows whose marginal weight is below this fraction of the peak are skipped.
const SLICE_FLOOR: f64 = 1e-14;

/// Upper bound on `W₂(γ, v)²` from the triangular coupling; exact for product densities.
pub fn triangular_cost(v: &GridField) -> Result<TriangularCost> {
    let (a, b) = match v.shape() {
        GridShape::Plane(a, b) => (*a, *b),
        GridShape::Line(_) => return Err(param("expected a planar density")),
    };
    let (na, nb) = (a.len(), b.len());
    let vals = v.values();
    let marginal: Vec<f64> = (0..na).map(|i| (0..nb).map(|j| b.trapezoid_weight(j) * vals[i * nb + j]).sum()).collect();
    let first = DensitySpec::new(GridField::from_values(GridShape::Line(a), marginal.clone())?)?;
    let gauss_a = DensitySpec::gaussian(a, 0.0, 1.0)?;
    let gauss_b = DensitySpec::gaussian(b, 0.0, 1.0)?;
    let marginal_cost = brenier_1d(&gauss_a, &first)?.cost();

    let stride = ((na - 1) / (CONDITIONAL_SLICES - 1)).max(1);
    let top = marginal.iter().cloned().fold(0.0, f64::max);
    let rows: Vec<usize> = (0..na).step_by(stride).collect();
    let mut conditional = 0.0;
    let mut used = 0;
    for (r, &i) in rows.iter().enumerate() {
        if marginal[i] < SLICE_FLOOR * top {
            continue;
        }
        let row = GridField::from_values(GridShape::Line(b), vals[i * nb..(i + 1) * nb].to_vec())?;
        let cost = brenier_1d(&gauss_b, &DensitySpec::normalized(row)?)?.cost();
        let edge = r == 0 || r + 1 == rows.len();
        let weight = stride as f64 * a.spacing() * if edge { 0.5 } else { 1.0 };
        conditional += weight * first.density(i) * cost;
        used += 1;
    }
    Ok(TriangularCost { marginal: marginal_cost, conditional, slices: used })
}
