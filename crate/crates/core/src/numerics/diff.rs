use alloc::vec;
use alloc::vec::Vec;

use super::field::GridField;
use super::grid::GridShape;
use crate::error::Result;

/// Finite-difference derivatives of `log f` sampled on the grid of `f`.
#[derive(Clone, Debug)]
pub struct LogDerivatives {
    /// One entry per axis.
    pub grad: Vec<GridField>,
    /// `[d11]` in one dimension, `[d11, d12, d22]` in two.
    pub hess: Vec<GridField>,
    pub laplacian: GridField,
}

/// Central differences of `log f`, second-order one-sided at the edges.
///
/// The mixed partial in two dimensions is the difference of the first derivative.
pub fn log_derivatives(f: &GridField) -> Result<LogDerivatives> {
    let logs = f.log_values()?;
    let shape = *f.shape();
    match shape {
        GridShape::Line(g) => {
            let h = g.spacing();
            let d1 = diff_line(&logs, h);
            let d2 = second_line(&logs, h);
            let grad = GridField::from_values(shape, d1)?;
            let hess = GridField::from_values(shape, d2)?;
            Ok(LogDerivatives { grad: vec![grad], laplacian: hess.clone(), hess: vec![hess] })
        }
        GridShape::Plane(a, b) => {
            let (na, nb) = (a.len(), b.len());
            let along_a = |data: &[f64], op: fn(&[f64], f64) -> Vec<f64>| {
                let mut out = vec![0.0; na * nb];
                let mut col = vec![0.0; na];
                for j in 0..nb {
                    for i in 0..na {
                        col[i] = data[i * nb + j];
                    }
                    for (i, v) in op(&col, a.spacing()).into_iter().enumerate() {
                        out[i * nb + j] = v;
                    }
                }
                out
            };
            let along_b = |data: &[f64], op: fn(&[f64], f64) -> Vec<f64>| {
                let mut out = Vec::with_capacity(na * nb);
                for i in 0..na {
                    out.extend(op(&data[i * nb..(i + 1) * nb], b.spacing()));
                }
                out
            };
            let g1 = along_a(&logs, diff_line);
            let g2 = along_b(&logs, diff_line);
            let h11 = along_a(&logs, second_line);
            let h22 = along_b(&logs, second_line);
            let h12 = along_b(&g1, diff_line);
            let lap: Vec<f64> = h11.iter().zip(&h22).map(|(x, y)| x + y).collect();
            Ok(LogDerivatives {
                grad: vec![GridField::from_values(shape, g1)?, GridField::from_values(shape, g2)?],
                hess: vec![
                    GridField::from_values(shape, h11)?,
                    GridField::from_values(shape, h12)?,
                    GridField::from_values(shape, h22)?,
                ],
                laplacian: GridField::from_values(shape, lap)?,
            })
        }
    }
}

pub(crate) fn diff_line(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    for k in 1..n - 1 {
        out[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
    }
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    out
}

pub(crate) fn second_line(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let h2 = h * h;
    let mut out = vec![0.0; n];
    for k in 1..n - 1 {
        out[k] = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / h2;
    }
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    out[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid1D;

    fn max_abs_err(f: &GridField, want: impl Fn(f64) -> f64) -> f64 {
        let s = f.shape();
        f.values().iter().enumerate().map(|(i, v)| (v - want(s.point(i)[0])).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_log_hessian_is_constant() {
        for beta in [0.5, 2.0] {
            let f = GridField::gaussian(GridShape::desk_line(), beta).unwrap();
            let d = log_derivatives(&f).unwrap();
            assert!(max_abs_err(&d.hess[0], |_| -1.0 / beta) < 1e-6);
            assert!(max_abs_err(&d.grad[0], |x| -x / beta) < 1e-6);
        }
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let s = GridShape::Line(Grid1D::new(-3.0, 3.0, 61).unwrap());
        let d = log_derivatives(&GridField::from_fn(s, |_| 2.5).unwrap()).unwrap();
        assert!(d.grad[0].values().iter().all(|v| v.abs() < 1e-12));
        assert!(d.hess[0].values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn bilinear_exponent_has_zero_laplacian() {
        let f = GridField::from_fn(GridShape::desk_plane(), |x| libm::exp(x[0] * x[1])).unwrap();
        let d = log_derivatives(&f).unwrap();
        assert!(d.laplacian.values().iter().all(|v| v.abs() < 1e-8));
        let s = f.shape();
        for i in (0..s.len()).step_by(97) {
            assert!((d.hess[1].values()[i] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn non_positive_input_is_rejected() {
        let s = GridShape::Line(Grid1D::new(-3.0, 3.0, 61).unwrap());
        assert!(log_derivatives(&GridField::from_fn(s, |x| x[0]).unwrap()).is_err());
    }

    #[test]
    fn second_order_convergence() {
        // exp of a non-polynomial log so the truncation error is visible
        let logf = |x: f64| -libm::cosh(x) - 0.3 * libm::sin(2.0 * x);
        let want = |x: f64| -libm::cosh(x) + 1.2 * libm::sin(2.0 * x);
        let err = |n: usize| {
            let s = GridShape::Line(Grid1D::new(-2.0, 2.0, n).unwrap());
            let f = GridField::from_fn(s, move |x| libm::exp(logf(x[0]))).unwrap();
            max_abs_err(&log_derivatives(&f).unwrap().hess[0], want)
        };
        let (coarse, fine) = (err(101), err(201));
        assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
    }
}
