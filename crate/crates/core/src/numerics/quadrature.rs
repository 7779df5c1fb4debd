use alloc::vec;
use alloc::vec::Vec;

use super::field::GridField;
use super::grid::{Grid1D, GridShape};
use crate::error::{param, Error, Result};
use crate::math::{exp, ln, log_sum_exp, sqrt, LN_2PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RuleKind {
    GaussHermite,
    Trapezoid,
}

/// Nodes and weights for integrals against the standard Gaussian measure.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureRule {
    kind: RuleKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

pub const DEFAULT_GH_NODES: usize = 96;

/// Gauss–Hermite rule for the standard Gaussian, weights summing to one.
///
/// Nodes come from the eigenvalues of the Jacobi matrix, then one or two Newton
/// steps on the orthonormal Hermite polynomial. Weights use the Christoffel sum,
/// rescaled to avoid overflow; far-tail weights may underflow to zero when `m` is large.
pub fn gauss_hermite_rule(m: usize) -> Result<QuadratureRule> {
    if !(2..=512).contains(&m) {
        return Err(param("Gauss-Hermite node count must lie in [2, 512]"));
    }
    let mut diag = vec![0.0; m];
    let mut off: Vec<f64> = (1..=m).map(|k| if k < m { sqrt(k as f64) } else { 0.0 }).collect();
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(f64::total_cmp);

    let mut nodes = diag;
    let mut weights = vec![0.0; m];
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        for _ in 0..3 {
            let h = hermite(m, *x);
            let step = h.last / (sqrt(m as f64) * h.prev);
            *x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let h = hermite(m, *x);
        *w = exp(-ln(h.sum_sq) - 2.0 * h.log_scale);
    }
    for i in 0..m / 2 {
        let a = 0.5 * (nodes[m - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[m - 1 - i] = a;
        let w = 0.5 * (weights[i] + weights[m - 1 - i]);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(QuadratureRule { kind: RuleKind::GaussHermite, nodes, weights })
}

/// Trapezoid rule on a grid for integrals against the standard Gaussian.
pub fn trapezoid_rule(grid: &Grid1D) -> QuadratureRule {
    let nodes: Vec<f64> = grid.points().collect();
    let weights =
        nodes.iter().enumerate().map(|(k, x)| grid.trapezoid_weight(k) * exp(-0.5 * x * x - 0.5 * LN_2PI)).collect();
    QuadratureRule { kind: RuleKind::Trapezoid, nodes, weights }
}

struct HermiteValues {
    last: f64,
    prev: f64,
    sum_sq: f64,
    log_scale: f64,
}

/// Orthonormal probabilists' Hermite values `ψ_m`, `ψ_{m-1}` and `Σ_{k<m} ψ_k²`,
/// all divided by `exp(log_scale)` (squares by its square).
fn hermite(m: usize, x: f64) -> HermiteValues {
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut sum_sq = 0.0;
    let mut log_scale = 0.0;
    for k in 0..m {
        sum_sq += cur * cur;
        let next = (x * cur - sqrt(k as f64) * prev) / sqrt((k + 1) as f64);
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
            sum_sq *= 1e-200;
            log_scale += 100.0 * core::f64::consts::LN_10;
        }
    }
    HermiteValues { last: cur, prev, sum_sq, log_scale }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e[i]` coupling `i` and `i+1` (`e[n-1]` unused). Implicit QL.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::Convergence("tridiagonal eigenvalue iteration".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = crate::math::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = crate::math::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// `∫ f dγ_β` by rescaling the nodes by `sqrt(β)`.
pub fn integrate_gaussian(f: impl Fn(f64) -> f64, beta: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(param("beta must be positive"));
    }
    let r = sqrt(beta);
    let mut acc = 0.0;
    for (x, w) in rule.iter() {
        let v = f(r * x);
        if !v.is_finite() {
            return Err(Error::Evaluation { node: vec![r * x] });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// `∫ f dγ_β` on the plane with the tensor rule.
pub fn integrate_gaussian_2d(f: impl Fn([f64; 2]) -> f64, beta: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(param("beta must be positive"));
    }
    let r = sqrt(beta);
    let mut acc = 0.0;
    for (x, wx) in rule.iter() {
        for (y, wy) in rule.iter() {
            let v = f([r * x, r * y]);
            if !v.is_finite() {
                return Err(Error::Evaluation { node: vec![r * x, r * y] });
            }
            acc += wx * wy * v;
        }
    }
    Ok(acc)
}

/// Default absolute tolerance on the estimated mass outside the grid.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Trapezoid integral over the grid with a check that the field has decayed at the edges.
pub fn integrate_lebesgue(f: &GridField) -> Result<f64> {
    let total = f.trapezoid();
    let tail = tail_estimate(f);
    let tol = TAIL_TOLERANCE * total.abs().max(1.0);
    if tail > tol {
        return Err(Error::Truncation { tail, tolerance: tol });
    }
    Ok(total)
}

/// Rough bound on the mass beyond the grid, extrapolating the decay rate at each edge
/// as a geometric series.
pub fn tail_estimate(f: &GridField) -> f64 {
    let v = f.values();
    let edge = |a: f64, b: f64, h: f64| -> f64 {
        let (a, b) = (a.abs(), b.abs());
        if a == 0.0 {
            return 0.0;
        }
        let ratio = a / b;
        if !(ratio < 1.0) {
            return f64::INFINITY;
        }
        h * a * ratio / (1.0 - ratio)
    };
    match f.shape() {
        GridShape::Line(g) => {
            let n = g.len();
            let h = g.spacing();
            edge(v[0], v[1], h) + edge(v[n - 1], v[n - 2], h)
        }
        GridShape::Plane(a, b) => {
            let (na, nb) = (a.len(), b.len());
            let mut tail = 0.0;
            for j in 0..nb {
                tail += b.trapezoid_weight(j)
                    * (edge(v[j], v[nb + j], a.spacing())
                        + edge(v[(na - 1) * nb + j], v[(na - 2) * nb + j], a.spacing()));
            }
            for i in 0..na {
                tail += a.trapezoid_weight(i)
                    * (edge(v[i * nb], v[i * nb + 1], b.spacing())
                        + edge(v[i * nb + nb - 1], v[i * nb + nb - 2], b.spacing()));
            }
            tail
        }
    }
}

/// Re-centring attempts before a Gaussian average is declared divergent.
const MAX_RECENTRE: usize = 12;

/// `log ∫ e^{L(z)} dγ(z)` in one or two dimensions on tensor Gauss–Hermite nodes.
///
/// When the weighted integrand peaks at the outermost nodes, the nodes are moved to the
/// peak (an exact change of variables) and the sum is redone. Returns `None` when the
/// peak keeps escaping or the sum is not finite.
pub fn log_gaussian_average(log_integrand: &dyn Fn(&[f64]) -> f64, dim: usize, rule: &QuadratureRule) -> Option<f64> {
    let m = rule.len();
    let (nodes, weights) = (rule.nodes(), rule.weights());
    let rows = if dim == 1 { 1 } else { m };
    let mut centre = [0.0f64; 2];
    let mut terms: Vec<f64> = Vec::with_capacity(m.pow(dim as u32));
    for _ in 0..=MAX_RECENTRE {
        terms.clear();
        let mut top = (f64::NEG_INFINITY, 0usize, 0usize);
        for i in 0..rows {
            for j in 0..m {
                let (w, u) = if dim == 1 {
                    (weights[j], [nodes[j], 0.0])
                } else {
                    (weights[i] * weights[j], [nodes[i], nodes[j]])
                };
                if !(w > 0.0) {
                    continue;
                }
                let z = [centre[0] + u[0], centre[1] + u[1]];
                // φ(c + u)/φ(u) = exp(-c·u - |c|²/2)
                let tilt =
                    -(centre[0] * u[0] + centre[1] * u[1]) - 0.5 * (centre[0] * centre[0] + centre[1] * centre[1]);
                let t = ln(w) + tilt + log_integrand(&z[..dim]);
                if t.is_nan() || t == f64::INFINITY {
                    return None;
                }
                if t > top.0 {
                    top = (t, i, j);
                }
                terms.push(t);
            }
        }
        if top.0 == f64::NEG_INFINITY {
            return Some(f64::NEG_INFINITY);
        }
        let edge = |k: usize| k == 0 || k + 1 == m;
        if !(edge(top.2) || (dim > 1 && edge(top.1))) {
            let out = log_sum_exp(terms.iter().copied());
            return (out.is_finite() || out == f64::NEG_INFINITY).then_some(out);
        }
        if dim == 1 {
            centre[0] += nodes[top.2];
        } else {
            centre[0] += nodes[top.1];
            centre[1] += nodes[top.2];
        }
    }
    None
}
