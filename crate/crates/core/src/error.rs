use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Failures raised by the numerical routines.
#[derive(Clone, Debug, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// A parameter lies outside its admissible range.
    Parameter(String),
    /// `(q-1)/(p-1)` does not exceed 1, so no positive time links the exponents.
    InadmissibleExponent { p: f64, q: f64 },
    /// `p` sits on an excluded value of a reverse regime.
    ExcludedExponent { p: f64 },
    /// An integrand returned a non-finite value at a quadrature node.
    Evaluation { node: Vec<f64> },
    /// A power or exponential is not integrable against the reference measure.
    Integrability(String),
    /// A function that must be strictly positive is not.
    Positivity { index: usize, value: f64 },
    /// Mass outside the grid is larger than the tolerance.
    Truncation { tail: f64, tolerance: f64 },
    /// A density is not normalized.
    Normalization { mass: f64 },
    /// Input outside the domain of an operation.
    Domain(String),
    /// Quantile or transport reconstruction failed.
    Reconstruction(String),
    /// An iterative routine did not converge.
    Convergence(String),
    /// A structural hypothesis required by an operation does not hold.
    Hypothesis(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::InadmissibleExponent { p, q } => {
                write!(f, "inadmissible exponents p={p}, q={q}: (q-1)/(p-1) must exceed 1")
            }
            Error::ExcludedExponent { p } => write!(f, "exponent p={p} is excluded in this regime"),
            Error::Evaluation { node } => write!(f, "non-finite integrand at node {node:?}"),
            Error::Integrability(msg) => {
                write!(f, "integrability failure ({msg}); inputs must lie in L^2(1/gamma_beta)")
            }
            Error::Positivity { index, value } => {
                write!(f, "strict positivity violated at grid index {index} (value {value:e})")
            }
            Error::Truncation { tail, tolerance } => {
                write!(f, "truncation: estimated tail mass {tail:e} exceeds {tolerance:e}")
            }
            Error::Normalization { mass } => write!(f, "density not normalized (mass {mass})"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Reconstruction(msg) => write!(f, "reconstruction error: {msg}"),
            Error::Convergence(msg) => write!(f, "no convergence: {msg}"),
            Error::Hypothesis(msg) => write!(f, "hypothesis not satisfied: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
