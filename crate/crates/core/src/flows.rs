//! Exact Fokker–Planck evolution, the regularised class built from it, and
//! log-convexity certificates.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::math::{exp, expm1, ln, sqrt, LN_2PI};
use crate::numerics::{
    log_derivatives, sym_eigenvalues, Analytic, GridField, GridShape, LogQuad, LogQuadMix, Mat2, QuadratureRule,
};
use crate::semigroups::ou_log_at;

/// Relative drift in total mass tolerated along the flow.
pub const MASS_DRIFT_TOL: f64 = 1e-6;

/// Diffusion speed `β` and time `t` of `∂v = βΔv + ∇·(x v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FPParams {
    pub beta: f64,
    pub t: f64,
}

impl FPParams {
    pub fn new(beta: f64, t: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(param("diffusion speed must be positive"));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(param("flow time must be finite and non-negative"));
        }
        Ok(Self { beta, t })
    }

    /// Variance `β(1 - e^{-2t})` of the transition kernel.
    pub fn kernel_variance(&self) -> f64 {
        -self.beta * expm1(-2.0 * self.t)
    }
}

/// Time at which the `2β` flow started from a measure lands in the class of order `β`.
pub const CLASS_TIME: f64 = 0.5 * core::f64::consts::LN_2;

/// Initial datum of the flow.
#[derive(Clone, Debug)]
pub enum MeasureSpec {
    Dirac(Vec<f64>),
    Discrete { points: Vec<Vec<f64>>, weights: Vec<f64> },
    Density(GridField),
}

impl MeasureSpec {
    pub fn dim(&self) -> usize {
        match self {
            MeasureSpec::Dirac(p) => p.len(),
            MeasureSpec::Discrete { points, .. } => points.first().map_or(0, Vec::len),
            MeasureSpec::Density(f) => f.dim(),
        }
    }

    fn validate(&self) -> Result<()> {
        let dim_ok = |d: usize| d == 1 || d == 2;
        match self {
            MeasureSpec::Dirac(p) if !dim_ok(p.len()) => Err(param("Dirac point must be 1-D or 2-D")),
            MeasureSpec::Discrete { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return Err(param("discrete measure needs matching, non-empty points and weights"));
                }
                let d = points[0].len();
                if !dim_ok(d) || points.iter().any(|p| p.len() != d) {
                    return Err(param("discrete points must share dimension 1 or 2"));
                }
                if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || weights.iter().sum::<f64>() <= 0.0 {
                    return Err(param("weights must be non-negative with positive total"));
                }
                Ok(())
            }
            MeasureSpec::Density(f) => {
                if f.values().iter().any(|v| *v < 0.0) {
                    return Err(Error::Domain("density takes negative values".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Total mass (trapezoid for sampled densities).
    pub fn mass(&self) -> f64 {
        match self {
            MeasureSpec::Dirac(_) => 1.0,
            MeasureSpec::Discrete { weights, .. } => weights.iter().sum(),
            MeasureSpec::Density(f) => f.log_quad().and_then(LogQuadMix::mass).unwrap_or_else(|| f.trapezoid()),
        }
    }

    fn atoms(&self) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
        match self {
            MeasureSpec::Dirac(p) => Some((vec![p.clone()], vec![1.0])),
            MeasureSpec::Discrete { points, weights } => Some((points.clone(), weights.clone())),
            MeasureSpec::Density(_) => None,
        }
    }
}

/// Centred `γ_β` as a log-quadratic term.
fn gaussian_term(dim: usize, beta: f64) -> Result<LogQuad> {
    LogQuad::gaussian(dim, beta)
}

/// `v_t` on `shape`, from the explicit transition kernel.
///
/// Measures and log-quadratic densities give closed forms. Other densities with an
/// evaluator are integrated against the kernel by quadrature in the log domain; purely
/// sampled densities are convolved on their grid.
pub fn fp_evolve(v0: &MeasureSpec, params: FPParams, shape: &GridShape, rule: &QuadratureRule) -> Result<GridField> {
    v0.validate()?;
    let dim = v0.dim();
    if dim != shape.dim() {
        return Err(param("measure and grid dimensions differ"));
    }
    let FPParams { beta, t } = params;
    let var = params.kernel_variance();
    let decay = exp(-t);
    let out = match v0 {
        MeasureSpec::Dirac(_) | MeasureSpec::Discrete { .. } => {
            if t == 0.0 {
                return Err(Error::Domain("a measure has no density at time 0".into()));
            }
            if var < 1e-10 {
                return Err(Error::Domain("flow time too small for a measure initial datum".into()));
            }
            let (points, weights) = v0.atoms().expect("measure");
            let means: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|c| decay * c).collect()).collect();
            GridField::from_log_quad(*shape, LogQuadMix::gaussian_mixture(dim, &means, &weights, var)?)?
        }
        MeasureSpec::Density(f) => {
            if t == 0.0 {
                return Ok(f.clone());
            }
            if f.shape() != shape && f.analytic().is_none() {
                return Err(param("sampled density must be evolved on its own grid"));
            }
            if let Some(mix) = f.log_quad() {
                let g = gaussian_term(dim, beta)?;
                let ratio = mix.times(&g.powf(-1.0)?)?;
                let moved = ratio.kernel_image(decay, var)?.times(&g)?;
                GridField::from_log_quad(*shape, moved)?
            } else if let Some(a) = f.analytic() {
                evolve_by_quadrature(a.clone(), dim, beta, decay, var, shape, rule)?
            } else {
                evolve_by_convolution(f, decay, var)?
            }
        }
    };
    let m0 = v0.mass();
    let m1 = out.trapezoid();
    if (m1 - m0).abs() > MASS_DRIFT_TOL * m0.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Truncation { tail: (m1 - m0).abs(), tolerance: MASS_DRIFT_TOL * m0 });
    }
    Ok(out)
}

/// `v_t = γ_β · E[(v0/γ_β)(e^{-t}x + sqrt(var) Y)]`.
fn evolve_by_quadrature(
    a: Analytic,
    dim: usize,
    beta: f64,
    decay: f64,
    var: f64,
    shape: &GridShape,
    rule: &QuadratureRule,
) -> Result<GridField> {
    let log_gauss = move |x: &[f64]| {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        -0.5 * sq / beta - 0.5 * dim as f64 * (LN_2PI + ln(beta))
    };
    let rule = Arc::new(rule.clone());
    // quadrature in the unit variable: e^{-t}x + sqrt(var)·Y, with Y ~ γ
    let s = -ln(decay);
    let unit_var = -expm1(-2.0 * s);
    let stretch = sqrt(var / unit_var);
    let analytic = Analytic::log_custom(move |x| {
        let ratio = |z: &[f64]| {
            let mut y = [0.0; 2];
            for i in 0..z.len() {
                y[i] = stretch * z[i];
            }
            a.log_at(&y[..z.len()]) - log_gauss(&y[..z.len()])
        };
        let mut xs = [0.0; 2];
        for i in 0..x.len() {
            xs[i] = x[i] / stretch;
        }
        log_gauss(x) + ou_log_at(&ratio, &xs[..x.len()], s, &rule).unwrap_or(f64::NAN)
    });
    GridField::from_analytic(*shape, analytic).map_err(|e| match e {
        Error::Evaluation { node } => {
            Error::Integrability(alloc::format!("Fokker-Planck kernel average diverges near {node:?}"))
        }
        other => other,
    })
}

/// Separable trapezoid convolution with the transition kernel on the input grid.
fn evolve_by_convolution(f: &GridField, decay: f64, var: f64) -> Result<GridField> {
    let shape = *f.shape();
    let kernel = |g: &crate::numerics::Grid1D| -> Vec<f64> {
        let n = g.len();
        let mut k = vec![0.0; n * n];
        let norm = -0.5 * (LN_2PI + ln(var));
        for i in 0..n {
            let x = g.point(i);
            for j in 0..n {
                let d = x - decay * g.point(j);
                k[i * n + j] = exp(norm - 0.5 * d * d / var) * g.trapezoid_weight(j);
            }
        }
        k
    };
    let v = f.values();
    let values = match shape {
        GridShape::Line(g) => {
            let k = kernel(&g);
            let n = g.len();
            (0..n).map(|i| (0..n).map(|j| k[i * n + j] * v[j]).sum()).collect()
        }
        GridShape::Plane(a, b) => {
            let (ka, kb) = (kernel(&a), kernel(&b));
            let (na, nb) = (a.len(), b.len());
            let mut rows = vec![0.0; na * nb];
            for i in 0..na {
                for j in 0..nb {
                    rows[i * nb + j] = (0..nb).map(|l| kb[j * nb + l] * v[i * nb + l]).sum();
                }
            }
            let mut out = vec![0.0; na * nb];
            for i in 0..na {
                for j in 0..nb {
                    out[i * nb + j] = (0..na).map(|l| ka[i * na + l] * rows[l * nb + j]).sum();
                }
            }
            out
        }
    };
    GridField::from_values(shape, values)
}

/// Element of the regularised class of order `β` generated by `mu`, and its
/// semi-log-convexity certificate.
pub fn fp_class_member(
    mu: &MeasureSpec,
    beta: f64,
    shape: &GridShape,
    rule: &QuadratureRule,
) -> Result<(GridField, ConvexityCertificate)> {
    let v = fp_evolve(mu, FPParams::new(2.0 * beta, CLASS_TIME)?, shape, rule)?;
    let cert = certify(&v, CertificateKind::Convex, beta, None)?;
    Ok((v, cert))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CertificateKind {
    /// `Δ log v ≥ -n/β`.
    Subharmonic,
    /// `∇² log v ≥ -id/β`.
    Convex,
    /// `∇² log v ≤ -id/β`.
    Concave,
    /// `Δ log v ≤ -n/β` (with `β = ∞` meaning `Δ log v ≤ 0`).
    Superharmonic,
}

/// Measured bound on the log-Hessian or log-Laplacian; passes when `margin ≥ -tol`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvexityCertificate {
    pub kind: CertificateKind,
    pub beta: f64,
    pub margin: f64,
    pub tol: f64,
    pub interior_only: bool,
    pub passed: bool,
}

/// Points closest to each edge left out of certificates.
pub const EDGE_EXCLUSION: usize = 2;

/// Default certificate tolerance `1e-4/β` (`1e-4` when `β` is infinite).
pub fn default_tol(beta: f64) -> f64 {
    if beta.is_finite() {
        1e-4 / beta
    } else {
        1e-4
    }
}

/// Log-Hessians at every grid point: exact for log-quadratic fields, finite differences otherwise.
pub fn log_hessians(v: &GridField) -> Result<Vec<Mat2>> {
    let shape = *v.shape();
    let dim = shape.dim();
    if let Some(mix) = v.log_quad() {
        v.log_values()?;
        return Ok((0..shape.len()).map(|i| mix.hess_log(&shape.point(i)[..dim])).collect());
    }
    let d = log_derivatives(v)?;
    Ok((0..shape.len())
        .map(|i| {
            if dim == 1 {
                [[d.hess[0].values()[i], 0.0], [0.0, 0.0]]
            } else {
                let (a, b, c) = (d.hess[0].values()[i], d.hess[1].values()[i], d.hess[2].values()[i]);
                [[a, b], [b, c]]
            }
        })
        .collect())
}

/// Certificate of the given kind over interior grid points.
pub fn certify(v: &GridField, kind: CertificateKind, beta: f64, tol: Option<f64>) -> Result<ConvexityCertificate> {
    if !(beta > 0.0) || beta.is_nan() {
        return Err(param("certificate parameter must be positive"));
    }
    let tol = tol.unwrap_or_else(|| default_tol(beta));
    let shape = *v.shape();
    let dim = shape.dim();
    let inv = 1.0 / beta;
    let hess = log_hessians(v)?;
    let mut margin = f64::INFINITY;
    for (i, h) in hess.iter().enumerate() {
        if !shape.is_interior(i, EDGE_EXCLUSION) {
            continue;
        }
        let (lo, hi) = if dim == 1 { (h[0][0], h[0][0]) } else { sym_eigenvalues(h) };
        let lap = if dim == 1 { h[0][0] } else { h[0][0] + h[1][1] };
        let m = match kind {
            CertificateKind::Subharmonic => lap + dim as f64 * inv,
            CertificateKind::Convex => lo + inv,
            CertificateKind::Concave => -inv - hi,
            CertificateKind::Superharmonic => -(dim as f64) * inv - lap,
        };
        margin = margin.min(m);
    }
    Ok(ConvexityCertificate { kind, beta, margin, tol, interior_only: true, passed: margin >= -tol })
}

/// Largest `β'` for which `v` is `β'`-semi-log-concave on the interior, or `None` when
/// the log-Hessian is not negative definite there.
pub fn concavity_parameter(v: &GridField) -> Result<Option<f64>> {
    let shape = *v.shape();
    let dim = shape.dim();
    let mut top = f64::NEG_INFINITY;
    for (i, h) in log_hessians(v)?.iter().enumerate() {
        if shape.is_interior(i, EDGE_EXCLUSION) {
            top = top.max(if dim == 1 { h[0][0] } else { sym_eigenvalues(h).1 });
        }
    }
    Ok((top < 0.0).then(|| -1.0 / top))
}

/// Certificate margins along the flow of speed `β` started at `v0`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreservationTrace {
    pub times: Vec<f64>,
    pub margins: Vec<f64>,
    /// `min λ_min(∇² log v_t) + 1/((1 - e^{-2t})β)`; `None` at `t = 0`.
    pub universal_margins: Vec<Option<f64>>,
    pub masses: Vec<f64>,
}

impl PreservationTrace {
    pub fn all_pass(&self, tol: f64) -> bool {
        self.margins.iter().all(|m| *m >= -tol)
    }
}

pub fn preservation_trace(
    v0: &MeasureSpec,
    beta: f64,
    kind: CertificateKind,
    times: &[f64],
    shape: &GridShape,
    rule: &QuadratureRule,
) -> Result<PreservationTrace> {
    let mut trace = PreservationTrace {
        times: times.to_vec(),
        margins: Vec::with_capacity(times.len()),
        universal_margins: Vec::with_capacity(times.len()),
        masses: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let params = FPParams::new(beta, t)?;
        let v = fp_evolve(v0, params, shape, rule)?;
        trace.margins.push(certify(&v, kind, beta, None)?.margin);
        trace.masses.push(v.trapezoid());
        trace.universal_margins.push(if t > 0.0 {
            Some(certify(&v, CertificateKind::Convex, params.kernel_variance(), Some(0.0))?.margin)
        } else {
            None
        });
    }
    Ok(trace)
}

/// Normalization tolerance for [`covariance`].
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Covariance matrix of a normalized density on its grid (entry `[0][0]` in one dimension).
pub fn covariance(v: &GridField) -> Result<Mat2> {
    let shape = *v.shape();
    let dim = shape.dim();
    let mass = v.trapezoid();
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization { mass });
    }
    let mut mean = [0.0; 2];
    let mut second = [[0.0; 2]; 2];
    for (i, val) in v.values().iter().enumerate() {
        let p = shape.point(i);
        let w = shape.weight(i) * val;
        for a in 0..dim {
            mean[a] += w * p[a];
            for b in 0..dim {
                second[a][b] += w * p[a] * p[b];
            }
        }
    }
    let mut cov = [[0.0; 2]; 2];
    for a in 0..dim {
        for b in 0..dim {
            cov[a][b] = second[a][b] / mass - mean[a] * mean[b] / (mass * mass);
        }
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gauss_hermite_rule, Grid1D};

    fn rule() -> QuadratureRule {
        gauss_hermite_rule(96).unwrap()
    }

    fn sup_gap(a: &GridField, b: &GridField) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_equilibrium_is_stationary() {
        let s = GridShape::desk_line();
        for beta in [0.5, 2.0] {
            let g = GridField::gaussian(s, beta).unwrap();
            for t in [0.1, 1.0, 5.0] {
                let v =
                    fp_evolve(&MeasureSpec::Density(g.clone()), FPParams::new(beta, t).unwrap(), &s, &rule()).unwrap();
                assert!(sup_gap(&v, &g) < 1e-12);
                // same through the quadrature path
                let closure =
                    GridField::from_log_fn(s, move |x| -0.5 * x[0] * x[0] / beta - 0.5 * (LN_2PI + libm::log(beta)))
                        .unwrap();
                let w =
                    fp_evolve(&MeasureSpec::Density(closure), FPParams::new(beta, t).unwrap(), &s, &rule()).unwrap();
                assert!(sup_gap(&w, &g) < 1e-10);
            }
        }
    }

    #[test]
    fn dirac_flows_to_gaussian_at_class_time() {
        let s = GridShape::desk_line();
        let beta = 1.7;
        let v = fp_evolve(&MeasureSpec::Dirac(vec![0.0]), FPParams::new(2.0 * beta, CLASS_TIME).unwrap(), &s, &rule())
            .unwrap();
        assert!(sup_gap(&v, &GridField::gaussian(s, beta).unwrap()) < 1e-14);
        assert!(matches!(
            fp_evolve(&MeasureSpec::Dirac(vec![0.0]), FPParams::new(beta, 0.0).unwrap(), &s, &rule()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn long_time_limit_is_equilibrium() {
        let s = GridShape::desk_line();
        let beta = 2.0;
        let v0 = LogQuadMix::gaussian_mixture(1, &[vec![-1.0], vec![2.5]], &[0.4, 0.6], 0.3).unwrap();
        let f = GridField::from_log_quad(s, v0).unwrap();
        let g = GridField::gaussian(s, beta).unwrap();
        let scale = g.values().iter().cloned().fold(0.0, f64::max);
        for spec in [MeasureSpec::Density(f.clone()), MeasureSpec::Density(f.sampled_only())] {
            let v = fp_evolve(&spec, FPParams::new(beta, 20.0).unwrap(), &s, &rule()).unwrap();
            assert!(sup_gap(&v, &g) < 1e-6 * scale);
        }
    }

    /// Brute-force convolution of γ_a with the class kernel on a fine grid.
    fn brute_force_class_member(a: f64, beta: f64, x: f64) -> f64 {
        let (n, lo, hi) = (20001, -20.0, 20.0);
        let h = (hi - lo) / (n - 1) as f64;
        let var = beta;
        let decay = libm::exp(-CLASS_TIME);
        (0..n)
            .map(|k| {
                let y = lo + k as f64 * h;
                let d = x - decay * y;
                h * libm::exp(-0.5 * y * y / a) / libm::sqrt(2.0 * core::f64::consts::PI * a)
                    * libm::exp(-0.5 * d * d / var)
                    / libm::sqrt(2.0 * core::f64::consts::PI * var)
            })
            .sum()
    }

    #[test]
    fn class_member_of_gaussian_density() {
        let s = GridShape::desk_line();
        let (a, beta) = (1.2, 2.0);
        let (v, cert) =
            fp_class_member(&MeasureSpec::Density(GridField::gaussian(s, a).unwrap()), beta, &s, &rule()).unwrap();
        assert!(cert.passed);
        for x in [-3.0, -0.5, 0.0, 1.7, 4.2] {
            assert!((v.value_at(&[x]) - brute_force_class_member(a, beta, x)).abs() < 1e-8);
        }
        // the variance is a/2 + β
        let want = GridField::gaussian(s, a / 2.0 + beta).unwrap();
        assert!(sup_gap(&v, &want) < 1e-12);
    }

    #[test]
    fn class_member_of_symmetric_pair() {
        let s = GridShape::desk_line();
        let (a, beta) = (2.0, 1.5);
        let mu = MeasureSpec::Discrete { points: vec![vec![-a], vec![a]], weights: vec![0.5, 0.5] };
        let (v, cert) = fp_class_member(&mu, beta, &s, &rule()).unwrap();
        assert!(cert.passed);
        let m = a / core::f64::consts::SQRT_2;
        for x in [-2.0, 0.0, 0.3, 3.0] {
            let n =
                |c: f64| libm::exp(-0.5 * (x - c) * (x - c) / beta) / libm::sqrt(2.0 * core::f64::consts::PI * beta);
            assert!((v.value_at(&[x]) - 0.5 * (n(m) + n(-m))).abs() < 1e-15);
        }
    }

    #[test]
    fn sampled_convolution_matches_closed_form() {
        let g = Grid1D::new(-12.0, 12.0, 1201).unwrap();
        let s = GridShape::Line(g);
        let f = GridField::gaussian(s, 0.7).unwrap();
        let exact = fp_evolve(&MeasureSpec::Density(f.clone()), FPParams::new(1.5, 0.4).unwrap(), &s, &rule()).unwrap();
        let conv =
            fp_evolve(&MeasureSpec::Density(f.sampled_only()), FPParams::new(1.5, 0.4).unwrap(), &s, &rule()).unwrap();
        assert!(sup_gap(&exact, &conv) < 1e-10);
        let p = GridShape::square(-8.0, 8.0, 81).unwrap();
        let f2 = GridField::gaussian(p, 0.7).unwrap();
        let exact2 =
            fp_evolve(&MeasureSpec::Density(f2.clone()), FPParams::new(1.5, 0.4).unwrap(), &p, &rule()).unwrap();
        let conv2 =
            fp_evolve(&MeasureSpec::Density(f2.sampled_only()), FPParams::new(1.5, 0.4).unwrap(), &p, &rule()).unwrap();
        assert!(sup_gap(&exact2, &conv2) < 1e-8);
    }

    #[test]
    fn certificates() {
        let s = GridShape::desk_line();
        let beta = 2.0;
        let c = certify(&GridField::gaussian(s, beta).unwrap(), CertificateKind::Concave, beta, None).unwrap();
        assert!(c.passed && c.margin.abs() < 1e-12);
        let bad = certify(&GridField::gaussian(s, 1.0).unwrap(), CertificateKind::Subharmonic, 2.0, None).unwrap();
        assert!(!bad.passed && (bad.margin + 0.5).abs() < 1e-12);
        // sampled fields go through finite differences
        let sampled = GridField::gaussian(s, beta).unwrap().sampled_only();
        let c = certify(&sampled, CertificateKind::Concave, beta, None).unwrap();
        assert!(c.passed && c.margin.abs() < 1e-6);
    }

    #[test]
    fn covariances() {
        let s = GridShape::desk_line();
        let c = covariance(&GridField::gaussian(s, 2.0).unwrap()).unwrap();
        assert!((c[0][0] - 2.0).abs() < 1e-10);
        let shifted = LogQuadMix::single(LogQuad::gaussian_at(1, &[1.5], 1.0).unwrap());
        let c = covariance(&GridField::from_log_quad(s, shifted).unwrap()).unwrap();
        assert!((c[0][0] - 1.0).abs() < 1e-10);
        let a = 2.0;
        let mix = LogQuadMix::gaussian_mixture(1, &[vec![-a], vec![a]], &[0.5, 0.5], 1.0).unwrap();
        let c = covariance(&GridField::from_log_quad(s, mix).unwrap()).unwrap();
        assert!((c[0][0] - (1.0 + a * a)).abs() < 1e-10);
        let p = GridShape::desk_plane();
        let c = covariance(&GridField::gaussian(p, 1.0).unwrap()).unwrap();
        assert!((c[0][0] - 1.0).abs() < 1e-10 && (c[1][1] - 1.0).abs() < 1e-10 && c[0][1].abs() < 1e-12);
        let half =
            GridField::from_fn(s, |x| 0.5 * libm::exp(-0.5 * x[0] * x[0]) / libm::sqrt(2.0 * core::f64::consts::PI))
                .unwrap();
        assert!(matches!(covariance(&half), Err(Error::Normalization { .. })));
    }

    #[test]
    fn concavity_is_preserved_and_universal_bound_holds() {
        let s = GridShape::desk_line();
        let beta = 0.5;
        let v0 = LogQuadMix::single(LogQuad::gaussian(1, 0.3).unwrap());
        let trace = preservation_trace(
            &MeasureSpec::Density(GridField::from_log_quad(s, v0).unwrap()),
            beta,
            CertificateKind::Concave,
            &[0.0, 0.1, 0.5, 2.0],
            &s,
            &rule(),
        )
        .unwrap();
        assert!(trace.all_pass(default_tol(beta)));
        assert!(trace.masses.iter().all(|m| (m - 1.0).abs() < 1e-7));
        let atoms =
            MeasureSpec::Discrete { points: vec![vec![-4.0], vec![0.5], vec![3.0]], weights: vec![0.2, 0.5, 0.3] };
        let trace = preservation_trace(&atoms, 1.0, CertificateKind::Convex, &[0.05, 0.3, 1.0], &s, &rule()).unwrap();
        assert!(trace.universal_margins.iter().all(|m| m.unwrap() >= -1e-12));
    }
}
