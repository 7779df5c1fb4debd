//! Functions of the form `exp(-x·Px/2 + l·x + c)` and finite sums of them.
//!
//! The family is closed under the Ornstein–Uhlenbeck kernel, dilations, products and
//! the Fokker–Planck flow, which is what the exact oracle paths rely on.

use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::math::{exp, ln, log_sum_exp, LN_2PI};

pub type Mat2 = [[f64; 2]; 2];

fn det(dim: usize, m: &Mat2) -> f64 {
    if dim == 1 {
        m[0][0]
    } else {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

fn inverse(dim: usize, m: &Mat2) -> Mat2 {
    if dim == 1 {
        [[1.0 / m[0][0], 0.0], [0.0, 0.0]]
    } else {
        let d = det(2, m);
        [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
    }
}

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn matvec(a: &Mat2, v: &[f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn symmetrize(m: Mat2) -> Mat2 {
    let off = 0.5 * (m[0][1] + m[1][0]);
    [[m[0][0], off], [off, m[1][1]]]
}

/// Whether a symmetric matrix is positive definite (strictly, with a small floor).
fn positive_definite(dim: usize, m: &Mat2) -> bool {
    if dim == 1 {
        m[0][0] > 1e-300
    } else {
        m[0][0] > 1e-300 && det(2, m) > 1e-300
    }
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let r = crate::math::hypot(half, m[0][1]);
    (mean - r, mean + r)
}

/// `exp(-x·Px/2 + l·x + c)` in one or two dimensions.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogQuad {
    dim: usize,
    prec: Mat2,
    lin: [f64; 2],
    offset: f64,
}

impl LogQuad {
    pub fn new(dim: usize, prec: Mat2, lin: [f64; 2], offset: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(param("log-quadratic terms live in one or two dimensions"));
        }
        let mut prec = symmetrize(prec);
        let mut lin = lin;
        if dim == 1 {
            prec = [[prec[0][0], 0.0], [0.0, 0.0]];
            lin[1] = 0.0;
        }
        let finite = prec.iter().flatten().chain(lin.iter()).all(|v| v.is_finite());
        if !finite || !offset.is_finite() {
            return Err(param("log-quadratic coefficients must be finite"));
        }
        Ok(Self { dim, prec, lin, offset })
    }

    /// One-dimensional `exp(a x^2 + b x + c)`.
    pub fn quadratic_1d(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(1, [[-2.0 * a, 0.0], [0.0, 0.0]], [b, 0.0], c)
    }

    /// Centred Gaussian density with covariance `var·id`.
    pub fn gaussian(dim: usize, var: f64) -> Result<Self> {
        Self::gaussian_at(dim, &[0.0, 0.0][..dim.min(2)], var)
    }

    /// Gaussian density with covariance `var·id` centred at `mean`.
    pub fn gaussian_at(dim: usize, mean: &[f64], var: f64) -> Result<Self> {
        if !(var > 0.0) {
            return Err(param("Gaussian variance must be positive"));
        }
        if mean.len() != dim {
            return Err(param("mean has the wrong dimension"));
        }
        let mut lin = [0.0; 2];
        let mut sq = 0.0;
        for i in 0..dim {
            lin[i] = mean[i] / var;
            sq += mean[i] * mean[i];
        }
        let p = 1.0 / var;
        let prec = [[p, 0.0], [0.0, if dim == 2 { p } else { 0.0 }]];
        let offset = -0.5 * dim as f64 * (LN_2PI + ln(var)) - 0.5 * sq / var;
        Self::new(dim, prec, lin, offset)
    }

    /// Gaussian density with diagonal covariance `diag(vars)` in two dimensions.
    pub fn gaussian_diag(vars: [f64; 2]) -> Result<Self> {
        if !(vars[0] > 0.0 && vars[1] > 0.0) {
            return Err(param("Gaussian variances must be positive"));
        }
        let offset = -(LN_2PI) - 0.5 * (ln(vars[0]) + ln(vars[1]));
        Self::new(2, [[1.0 / vars[0], 0.0], [0.0, 1.0 / vars[1]]], [0.0; 2], offset)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn precision(&self) -> Mat2 {
        self.prec
    }
    pub fn linear(&self) -> [f64; 2] {
        self.lin
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn log_at(&self, x: &[f64]) -> f64 {
        if self.dim == 1 {
            let y = x[0];
            -0.5 * self.prec[0][0] * y * y + self.lin[0] * y + self.offset
        } else {
            let (a, b) = (x[0], x[1]);
            let quad = self.prec[0][0] * a * a + 2.0 * self.prec[0][1] * a * b + self.prec[1][1] * b * b;
            -0.5 * quad + self.lin[0] * a + self.lin[1] * b + self.offset
        }
    }

    #[inline]
    pub fn grad_log(&self, x: &[f64]) -> [f64; 2] {
        if self.dim == 1 {
            [self.lin[0] - self.prec[0][0] * x[0], 0.0]
        } else {
            let px = matvec(&self.prec, &[x[0], x[1]]);
            [self.lin[0] - px[0], self.lin[1] - px[1]]
        }
    }

    pub fn hess_log(&self) -> Mat2 {
        [[-self.prec[0][0], -self.prec[0][1]], [-self.prec[1][0], -self.prec[1][1]]]
    }

    /// Pointwise product.
    pub fn times(&self, other: &LogQuad) -> Result<Self> {
        if self.dim != other.dim {
            return Err(param("dimension mismatch"));
        }
        let mut prec = self.prec;
        for i in 0..2 {
            for j in 0..2 {
                prec[i][j] += other.prec[i][j];
            }
        }
        let lin = [self.lin[0] + other.lin[0], self.lin[1] + other.lin[1]];
        Self::new(self.dim, prec, lin, self.offset + other.offset)
    }

    /// Pointwise power `f^r`.
    pub fn powf(&self, r: f64) -> Result<Self> {
        let mut prec = self.prec;
        prec.iter_mut().flatten().for_each(|v| *v *= r);
        Self::new(self.dim, prec, [self.lin[0] * r, self.lin[1] * r], self.offset * r)
    }

    /// `x ↦ f(k x)`.
    pub fn dilate(&self, k: f64) -> Result<Self> {
        let mut prec = self.prec;
        prec.iter_mut().flatten().for_each(|v| *v *= k * k);
        Self::new(self.dim, prec, [self.lin[0] * k, self.lin[1] * k], self.offset)
    }

    /// Multiply by the constant `exp(c)`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.dim, self.prec, self.lin, self.offset + c)
    }

    /// `x ↦ f(x - m)`.
    pub fn translated(&self, m: &[f64]) -> Result<Self> {
        let mut mv = [0.0; 2];
        mv[..self.dim].copy_from_slice(&m[..self.dim]);
        let pm = matvec(&self.prec, &mv);
        let lin = [self.lin[0] + pm[0], self.lin[1] + pm[1]];
        let quad = mv[0] * pm[0] + mv[1] * pm[1];
        let offset = self.offset - 0.5 * quad - (self.lin[0] * mv[0] + self.lin[1] * mv[1]);
        Self::new(self.dim, self.prec, lin, offset)
    }

    /// `x ↦ E f(decay·x + sqrt(noise_var)·Y)` with `Y` standard normal.
    ///
    /// Requires `id + noise_var·P` to be positive definite; otherwise the
    /// average diverges.
    pub fn kernel_image(&self, decay: f64, noise_var: f64) -> Result<Self> {
        let dim = self.dim;
        let mut a = [[0.0; 2]; 2];
        for i in 0..dim {
            for j in 0..dim {
                a[i][j] = noise_var * self.prec[i][j] + if i == j { 1.0 } else { 0.0 };
            }
        }
        if !positive_definite(dim, &a) {
            return Err(Error::Integrability(alloc::format!(
                "Gaussian kernel average diverges (noise variance {noise_var})"
            )));
        }
        let ainv = inverse(dim, &a);
        let pa = symmetrize(matmul(&self.prec, &ainv));
        let mut prec = [[0.0; 2]; 2];
        for i in 0..dim {
            for j in 0..dim {
                prec[i][j] = decay * decay * pa[i][j];
            }
        }
        let al = matvec(&ainv, &self.lin);
        let lin = [decay * al[0], decay * al[1]];
        let quad = self.lin[0] * al[0] + self.lin[1] * al[1];
        let offset = self.offset + 0.5 * noise_var * quad - 0.5 * ln(det(dim, &a));
        Self::new(dim, prec, lin, offset)
    }

    /// Logarithm of the Lebesgue integral, when finite.
    pub fn log_mass(&self) -> Option<f64> {
        if !positive_definite(self.dim, &self.prec) {
            return None;
        }
        let pinv = inverse(self.dim, &self.prec);
        let pl = matvec(&pinv, &self.lin);
        let quad = self.lin[0] * pl[0] + self.lin[1] * pl[1];
        let d = self.dim as f64;
        Some(0.5 * d * LN_2PI - 0.5 * ln(det(self.dim, &self.prec)) + self.offset + 0.5 * quad)
    }
}

/// Finite positive combination of [`LogQuad`] terms (mixtures, products, images).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogQuadMix {
    dim: usize,
    terms: Vec<LogQuad>,
}

impl LogQuadMix {
    pub fn new(terms: Vec<LogQuad>) -> Result<Self> {
        let dim = terms.first().map(LogQuad::dim).ok_or_else(|| param("empty mixture"))?;
        if terms.iter().any(|t| t.dim != dim) {
            return Err(param("mixture terms differ in dimension"));
        }
        Ok(Self { dim, terms })
    }

    pub fn single(term: LogQuad) -> Self {
        Self { dim: term.dim, terms: alloc::vec![term] }
    }

    pub fn gaussian(dim: usize, var: f64) -> Result<Self> {
        Ok(Self::single(LogQuad::gaussian(dim, var)?))
    }

    /// `sum_i w_i N(mean_i, var·id)`.
    pub fn gaussian_mixture(dim: usize, means: &[Vec<f64>], weights: &[f64], var: f64) -> Result<Self> {
        if means.len() != weights.len() || means.is_empty() {
            return Err(param("mixture needs matching, non-empty means and weights"));
        }
        let mut terms = Vec::with_capacity(means.len());
        for (m, &w) in means.iter().zip(weights) {
            if !(w > 0.0) {
                if w == 0.0 {
                    continue;
                }
                return Err(param("mixture weights must be non-negative"));
            }
            terms.push(LogQuad::gaussian_at(dim, m, var)?.shifted(ln(w))?);
        }
        Self::new(terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn terms(&self) -> &[LogQuad] {
        &self.terms
    }

    #[inline]
    pub fn log_at(&self, x: &[f64]) -> f64 {
        if self.terms.len() == 1 {
            return self.terms[0].log_at(x);
        }
        log_sum_exp(self.terms.iter().map(|t| t.log_at(x)))
    }

    #[inline]
    pub fn value_at(&self, x: &[f64]) -> f64 {
        exp(self.log_at(x))
    }

    /// Softmax weights of the terms at `x`.
    fn responsibilities(&self, x: &[f64]) -> Vec<f64> {
        let logs: Vec<f64> = self.terms.iter().map(|t| t.log_at(x)).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = logs.iter().map(|l| exp(l - top)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        w
    }

    pub fn grad_log(&self, x: &[f64]) -> [f64; 2] {
        if self.terms.len() == 1 {
            return self.terms[0].grad_log(x);
        }
        let w = self.responsibilities(x);
        let mut g = [0.0; 2];
        for (t, wi) in self.terms.iter().zip(&w) {
            let gt = t.grad_log(x);
            g[0] += wi * gt[0];
            g[1] += wi * gt[1];
        }
        g
    }

    pub fn hess_log(&self, x: &[f64]) -> Mat2 {
        if self.terms.len() == 1 {
            return self.terms[0].hess_log();
        }
        let w = self.responsibilities(x);
        let mut mean = [0.0; 2];
        let mut second = [[0.0; 2]; 2];
        for (t, wi) in self.terms.iter().zip(&w) {
            let g = t.grad_log(x);
            let h = t.hess_log();
            for i in 0..2 {
                mean[i] += wi * g[i];
                for j in 0..2 {
                    second[i][j] += wi * (h[i][j] + g[i] * g[j]);
                }
            }
        }
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = second[i][j] - mean[i] * mean[j];
            }
        }
        out
    }

    fn map(&self, f: impl Fn(&LogQuad) -> Result<LogQuad>) -> Result<Self> {
        let terms = self.terms.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: self.dim, terms })
    }

    pub fn times(&self, factor: &LogQuad) -> Result<Self> {
        self.map(|t| t.times(factor))
    }

    pub fn dilate(&self, k: f64) -> Result<Self> {
        self.map(|t| t.dilate(k))
    }

    pub fn shifted(&self, c: f64) -> Result<Self> {
        self.map(|t| t.shifted(c))
    }

    pub fn translated(&self, m: &[f64]) -> Result<Self> {
        self.map(|t| t.translated(m))
    }

    pub fn kernel_image(&self, decay: f64, noise_var: f64) -> Result<Self> {
        self.map(|t| t.kernel_image(decay, noise_var))
    }

    /// Pointwise power; closed form only for a single term.
    pub fn powf(&self, r: f64) -> Option<Self> {
        match self.terms.as_slice() {
            [t] => t.powf(r).ok().map(Self::single),
            _ => None,
        }
    }

    /// Lebesgue integral, when every term is integrable.
    pub fn mass(&self) -> Option<f64> {
        let logs: Option<Vec<f64>> = self.terms.iter().map(LogQuad::log_mass).collect();
        let logs = logs?;
        Some(exp(log_sum_exp(logs.iter().cloned())))
    }
}
