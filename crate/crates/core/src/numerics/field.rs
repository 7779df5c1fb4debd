use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::grid::{Grid1D, GridShape};
use super::logquad::{LogQuadMix, Mat2};
use crate::error::{param, Error, Result};
use crate::math::{exp, ln};

pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Exact evaluator attached to a sampled field.
#[derive(Clone)]
pub enum Analytic {
    /// Gaussian, Gaussian mixture or any log-quadratic combination.
    LogQuad(LogQuadMix),
    /// Arbitrary closure returning the value.
    Custom(PointFn),
    /// Arbitrary closure returning the logarithm of a positive value.
    LogCustom(PointFn),
}

impl fmt::Debug for Analytic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Analytic::LogQuad(m) => f.debug_tuple("LogQuad").field(m).finish(),
            Analytic::Custom(_) => f.write_str("Custom(..)"),
            Analytic::LogCustom(_) => f.write_str("LogCustom(..)"),
        }
    }
}

impl Analytic {
    pub fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Analytic::Custom(Arc::new(f))
    }

    pub fn log_custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Analytic::LogCustom(Arc::new(f))
    }

    #[inline]
    pub fn value_at(&self, x: &[f64]) -> f64 {
        match self {
            Analytic::LogQuad(m) => m.value_at(x),
            Analytic::Custom(f) => f(x),
            Analytic::LogCustom(f) => exp(f(x)),
        }
    }

    #[inline]
    pub fn log_at(&self, x: &[f64]) -> f64 {
        match self {
            Analytic::LogQuad(m) => m.log_at(x),
            Analytic::Custom(f) => ln(f(x)),
            Analytic::LogCustom(f) => f(x),
        }
    }
}

/// Step for finite differences of closures.
const FD_STEP: f64 = 1e-3;

/// Fourth-order central difference of `g` along coordinate `axis`.
fn central_fd(g: &dyn Fn(&[f64]) -> f64, x: &[f64], axis: usize) -> f64 {
    let mut p = [x[0], if x.len() > 1 { x[1] } else { 0.0 }];
    let dim = x.len();
    let base = p[axis];
    let mut at = |d: f64| {
        p[axis] = base + d;
        g(&p[..dim])
    };
    let h = FD_STEP;
    (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
}

/// A real function sampled on a uniform 1-D or 2-D grid, optionally with an exact evaluator.
#[derive(Clone, Debug)]
pub struct GridField {
    shape: GridShape,
    values: Vec<f64>,
    analytic: Option<Analytic>,
}

impl GridField {
    pub fn from_values(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(param("value count does not match the grid"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation { node: shape.point(i)[..shape.dim()].to_vec() });
        }
        Ok(Self { shape, values, analytic: None })
    }

    pub fn from_analytic(shape: GridShape, analytic: Analytic) -> Result<Self> {
        let dim = shape.dim();
        if let Analytic::LogQuad(m) = &analytic {
            if m.dim() != dim {
                return Err(param("analytic dimension does not match the grid"));
            }
        }
        let mut values = Vec::with_capacity(shape.len());
        for i in 0..shape.len() {
            let x = shape.point(i);
            let v = analytic.value_at(&x[..dim]);
            if !v.is_finite() {
                return Err(Error::Evaluation { node: x[..dim].to_vec() });
            }
            values.push(v);
        }
        Ok(Self { shape, values, analytic: Some(analytic) })
    }

    pub fn from_fn(shape: GridShape, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::from_analytic(shape, Analytic::custom(f))
    }

    pub fn from_log_fn(shape: GridShape, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::from_analytic(shape, Analytic::log_custom(f))
    }

    pub fn from_log_quad(shape: GridShape, mix: LogQuadMix) -> Result<Self> {
        Self::from_analytic(shape, Analytic::LogQuad(mix))
    }

    /// Centred Gaussian density `γ_var` on the grid.
    pub fn gaussian(shape: GridShape, var: f64) -> Result<Self> {
        Self::from_log_quad(shape, LogQuadMix::gaussian(shape.dim(), var)?)
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }
    pub fn dim(&self) -> usize {
        self.shape.dim()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn analytic(&self) -> Option<&Analytic> {
        self.analytic.as_ref()
    }
    pub fn log_quad(&self) -> Option<&LogQuadMix> {
        match &self.analytic {
            Some(Analytic::LogQuad(m)) => Some(m),
            _ => None,
        }
    }

    /// The grid of a 1-D field.
    pub fn grid(&self) -> Result<&Grid1D> {
        match &self.shape {
            GridShape::Line(g) => Ok(g),
            GridShape::Plane(..) => Err(param("expected a one-dimensional field")),
        }
    }

    /// Drop the analytic evaluator, keeping the samples.
    pub fn sampled_only(&self) -> Self {
        Self { shape: self.shape, values: self.values.clone(), analytic: None }
    }

    /// Value at an arbitrary point: exact when an evaluator is attached, interpolated otherwise.
    #[inline]
    pub fn value_at(&self, x: &[f64]) -> f64 {
        match &self.analytic {
            Some(a) => a.value_at(x),
            None => self.interpolate(x),
        }
    }

    #[inline]
    pub fn log_at(&self, x: &[f64]) -> f64 {
        match &self.analytic {
            Some(a) => a.log_at(x),
            None => ln(self.interpolate(x)),
        }
    }

    /// Logarithm at every grid point, or the index of the first non-positive sample.
    pub fn log_values(&self) -> Result<Vec<f64>> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(self.values.len());
        for (i, v) in self.values.iter().enumerate() {
            let l = match &self.analytic {
                Some(a) => a.log_at(&self.shape.point(i)[..dim]),
                None => ln(*v),
            };
            if !l.is_finite() {
                return Err(Error::Positivity { index: i, value: *v });
            }
            out.push(l);
        }
        Ok(out)
    }

    /// Gradient of `log f` at `x`.
    pub fn grad_log_at(&self, x: &[f64]) -> [f64; 2] {
        if let Some(Analytic::LogQuad(m)) = &self.analytic {
            return m.grad_log(x);
        }
        let mut g = [0.0; 2];
        for (axis, slot) in g.iter_mut().enumerate().take(self.dim()) {
            *slot = self.fd(&|p| self.log_at(p), x, axis);
        }
        g
    }

    /// Gradient of `f` at `x`.
    pub fn grad_at(&self, x: &[f64]) -> [f64; 2] {
        match &self.analytic {
            Some(Analytic::LogQuad(_)) | Some(Analytic::LogCustom(_)) => {
                let v = self.value_at(x);
                let g = self.grad_log_at(x);
                [v * g[0], v * g[1]]
            }
            _ => {
                let mut g = [0.0; 2];
                for (axis, slot) in g.iter_mut().enumerate().take(self.dim()) {
                    *slot = self.fd(&|p| self.value_at(p), x, axis);
                }
                g
            }
        }
    }

    /// Hessian of `log f` at `x` (exact for log-quadratic fields).
    pub fn hess_log_at(&self, x: &[f64]) -> Mat2 {
        if let Some(Analytic::LogQuad(m)) = &self.analytic {
            return m.hess_log(x);
        }
        let dim = self.dim();
        let mut h = [[0.0; 2]; 2];
        for i in 0..dim {
            for j in 0..dim {
                let gi = |p: &[f64]| self.fd(&|q| self.log_at(q), p, i);
                h[i][j] = self.fd(&gi, x, j);
            }
        }
        if dim == 2 {
            let off = 0.5 * (h[0][1] + h[1][0]);
            h[0][1] = off;
            h[1][0] = off;
        }
        h
    }

    fn fd(&self, g: &dyn Fn(&[f64]) -> f64, x: &[f64], axis: usize) -> f64 {
        if self.analytic.is_some() {
            return central_fd(g, x, axis);
        }
        let h = self.shape.axis(axis).spacing();
        let mut p = [x[0], if x.len() > 1 { x[1] } else { 0.0 }];
        let base = p[axis];
        p[axis] = base + h;
        let up = g(&p[..x.len()]);
        p[axis] = base - h;
        let down = g(&p[..x.len()]);
        (up - down) / (2.0 * h)
    }

    /// Catmull–Rom interpolation of the samples; constant extension outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        match &self.shape {
            GridShape::Line(g) => cubic_line(g, |k| self.values[k], x[0]),
            GridShape::Plane(a, b) => {
                let nb = b.len();
                let (i, t) = a.locate(x[0]);
                let row = |k: usize| cubic_line(b, |j| self.values[k * nb + j], x[1]);
                cubic_blend(a.len(), i, t, row)
            }
        }
    }

    /// Largest relative disagreement between the samples and the attached evaluator.
    pub fn analytic_mismatch(&self) -> f64 {
        let Some(a) = &self.analytic else { return 0.0 };
        let dim = self.dim();
        let mut worst = 0.0f64;
        for (i, v) in self.values.iter().enumerate() {
            let e = a.value_at(&self.shape.point(i)[..dim]);
            let scale = v.abs().max(e.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((v - e).abs() / scale);
        }
        worst
    }

    /// `e^c f`, keeping the evaluator.
    pub fn scaled_log(&self, c: f64) -> Result<Self> {
        let analytic = match &self.analytic {
            None => None,
            Some(Analytic::LogQuad(m)) => Some(Analytic::LogQuad(m.shifted(c)?)),
            Some(Analytic::Custom(f)) => {
                let f = f.clone();
                let k = exp(c);
                Some(Analytic::custom(move |x| k * f(x)))
            }
            Some(Analytic::LogCustom(f)) => {
                let f = f.clone();
                Some(Analytic::log_custom(move |x| f(x) + c))
            }
        };
        let k = exp(c);
        let values = self.values.iter().map(|v| v * k).collect();
        Ok(Self { shape: self.shape, values, analytic })
    }

    /// `x ↦ f(x - m)` on the same grid; sampled fields are interpolated.
    pub fn translated(&self, m: &[f64]) -> Result<Self> {
        let dim = self.dim();
        if m.len() != dim {
            return Err(param("shift has the wrong dimension"));
        }
        let mut mv = [0.0; 2];
        mv[..dim].copy_from_slice(m);
        let back = move |x: &[f64]| -> [f64; 2] {
            let mut y = [0.0; 2];
            for a in 0..x.len() {
                y[a] = x[a] - mv[a];
            }
            y
        };
        match &self.analytic {
            Some(Analytic::LogQuad(q)) => Self::from_log_quad(self.shape, q.translated(m)?),
            Some(Analytic::Custom(f)) => {
                let f = f.clone();
                Self::from_fn(self.shape, move |x| f(&back(x)[..x.len()]))
            }
            Some(Analytic::LogCustom(f)) => {
                let f = f.clone();
                Self::from_log_fn(self.shape, move |x| f(&back(x)[..x.len()]))
            }
            None => {
                let values = (0..self.shape.len())
                    .map(|i| {
                        let y = back(&self.shape.point(i)[..dim]);
                        self.interpolate(&y[..dim])
                    })
                    .collect();
                Self::from_values(self.shape, values)
            }
        }
    }

    /// Lebesgue integral by the composite trapezoid rule (no truncation check).
    pub fn trapezoid(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| v * self.shape.weight(i)).sum()
    }
}

fn cubic_line(g: &Grid1D, val: impl Fn(usize) -> f64, x: f64) -> f64 {
    if x <= g.lo() {
        return val(0);
    }
    if x >= g.hi() {
        return val(g.len() - 1);
    }
    let (k, t) = g.locate(x);
    cubic_blend(g.len(), k, t, val)
}

fn cubic_blend(n: usize, k: usize, t: f64, val: impl Fn(usize) -> f64) -> f64 {
    let p1 = val(k);
    let p2 = val(k + 1);
    if k == 0 || k + 2 >= n {
        return p1 + t * (p2 - p1);
    }
    let p0 = val(k - 1);
    let p3 = val(k + 2);
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * ((2.0 * p1)
        + (-p0 + p2) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3)
}
