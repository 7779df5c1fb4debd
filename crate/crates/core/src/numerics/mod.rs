//! Grids, quadrature and finite differences.

mod diff;
mod field;
mod grid;
mod logquad;
mod quadrature;

pub(crate) use diff::{diff_line, second_line};
pub use diff::{log_derivatives, LogDerivatives};
pub use field::{Analytic, GridField, PointFn};
pub use grid::{Grid1D, GridShape};
pub use logquad::{sym_eigenvalues, LogQuad, LogQuadMix, Mat2};
pub use quadrature::{
    gauss_hermite_rule, integrate_gaussian, integrate_gaussian_2d, integrate_lebesgue, log_gaussian_average,
    tail_estimate, trapezoid_rule, QuadratureRule, RuleKind, DEFAULT_GH_NODES, TAIL_TOLERANCE,
};
