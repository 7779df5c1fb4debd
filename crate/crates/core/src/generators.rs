//! Seeded random inputs for property suites and sweeps.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{param, Result};
use crate::flows::{fp_class_member, MeasureSpec};
use crate::math::{cos, expm1, ln, ln_cosh, sin, LN_2PI};
use crate::numerics::{GridField, GridShape, LogQuadMix, QuadratureRule};
use crate::semigroups::ExponentTriple;
use crate::transport::PotentialSpec;

/// Largest number of atoms in a random discrete measure.
pub const MAX_ATOMS: usize = 8;
/// Atoms are drawn from `[-ATOM_RANGE, ATOM_RANGE]^n`.
pub const ATOM_RANGE: f64 = 3.0;
/// Distance kept from the excluded exponents `p = 0` and `p = 1 - e^{-2s}`.
pub const EXPONENT_MARGIN: f64 = 0.05;

/// Discrete measure with `1..=8` atoms in the cube and Dirichlet(1) weights.
pub fn random_atoms<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> MeasureSpec {
    let k = rng.gen_range(1..=MAX_ATOMS);
    let points = (0..k).map(|_| (0..dim).map(|_| rng.gen_range(-ATOM_RANGE..=ATOM_RANGE)).collect()).collect();
    // normalized exponentials are Dirichlet(1, ..., 1)
    let raw: Vec<f64> = (0..k).map(|_| -ln(1.0 - rng.gen::<f64>())).collect();
    let total: f64 = raw.iter().sum();
    MeasureSpec::Discrete { points, weights: raw.iter().map(|w| w / total).collect() }
}

/// Member of the regularised class of order `β` built from [`random_atoms`]; it is
/// `β`-semi-log-convex and so `β`-semi-log-subharmonic.
pub fn fp_random<R: Rng + ?Sized>(
    rng: &mut R,
    beta: f64,
    shape: &GridShape,
    rule: &QuadratureRule,
) -> Result<GridField> {
    Ok(fp_class_member(&random_atoms(rng, shape.dim()), beta, shape, rule)?.0)
}

/// Parameters of the tilt `γ_b · e^{-c ln cosh(a(x - m))}` in one dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoshTilt {
    pub variance: f64,
    pub weight: f64,
    pub rate: f64,
    pub centre: f64,
}

impl CoshTilt {
    /// Unnormalized log-density.
    pub fn log_at(&self, x: f64) -> f64 {
        -0.5 * x * x / self.variance - self.weight * ln_cosh(self.rate * (x - self.centre))
    }

    /// Range of `(log v)''`: `[-1/b - c a², -1/b]`.
    pub fn curvature_range(&self) -> (f64, f64) {
        (-1.0 / self.variance - self.weight * self.rate * self.rate, -1.0 / self.variance)
    }

    /// Normalized density on a line grid, keeping the exact evaluator.
    pub fn field(&self, shape: GridShape) -> Result<GridField> {
        if shape.dim() != 1 {
            return Err(param("cosh tilts are one-dimensional"));
        }
        let t = *self;
        let raw = GridField::from_log_fn(shape, move |x| t.log_at(x[0]))?;
        raw.scaled_log(-ln(raw.trapezoid()))
    }
}

/// `β`-semi-log-concave input for `β ≤ 1`: the tilt of `γ_β` by a convex bump.
pub fn log_concave_random<R: Rng + ?Sized>(rng: &mut R, beta: f64, shape: GridShape) -> Result<GridField> {
    cosh_tilt_concave(rng, beta).field(shape)
}

pub fn cosh_tilt_concave<R: Rng + ?Sized>(rng: &mut R, beta: f64) -> CoshTilt {
    CoshTilt {
        variance: beta,
        weight: rng.gen_range(0.0..=1.0),
        rate: rng.gen_range(0.3..=1.5),
        centre: rng.gen_range(-1.0..=1.0),
    }
}

/// Input meeting the transport hypotheses at `β`: for `β > 1`, `0 ≥ (log v)'' ≥ -1/β`;
/// for `β < 1`, `(log v)'' ≤ -1/β`.
pub fn talagrand_admissible<R: Rng + ?Sized>(rng: &mut R, beta: f64) -> CoshTilt {
    if beta <= 1.0 {
        return cosh_tilt_concave(rng, beta);
    }
    let variance = beta * rng.gen_range(1.1..=3.0);
    let budget = 1.0 / beta - 1.0 / variance;
    let rate = rng.gen_range(0.3..=1.5);
    CoshTilt {
        variance,
        weight: rng.gen_range(0.0..=1.0) * budget / (rate * rate),
        rate,
        centre: rng.gen_range(-1.0..=1.0),
    }
}

/// Positive input without structural hypotheses: a Gaussian mixture with narrow components,
/// so that `v/γ` stays bounded.
pub fn positive_random<R: Rng + ?Sized>(rng: &mut R, shape: GridShape) -> Result<GridField> {
    let dim = shape.dim();
    let k = rng.gen_range(1..=4);
    let means: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..=2.0)).collect()).collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..=1.0)).collect();
    let var = rng.gen_range(0.3..=0.95);
    GridField::from_log_quad(shape, LogQuadMix::gaussian_mixture(dim, &means, &weights, var)?)
}

/// `Σ a_k sin(ω_k x + φ_k)` with `Σ |a_k ω_k|` equal to the Lipschitz budget.
#[derive(Clone, Debug, PartialEq)]
pub struct SineSum {
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
}

impl SineSum {
    pub fn value(&self, x: f64) -> f64 {
        self.terms().map(|(a, w, p)| a * sin(w * x + p)).sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.terms().map(|(a, w, p)| a * w * cos(w * x + p)).sum()
    }

    pub fn lipschitz(&self) -> f64 {
        self.terms().map(|(a, w, _)| (a * w).abs()).sum()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.amplitudes.iter().zip(&self.frequencies).zip(&self.phases).map(|((a, w), p)| (*a, *w, *p))
    }
}

pub fn lipschitz_random<R: Rng + ?Sized>(rng: &mut R, lipschitz: f64) -> SineSum {
    let k = rng.gen_range(1..=4);
    let frequencies: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..=2.0)).collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let scale: f64 = raw.iter().zip(&frequencies).map(|(a, w)| (a * w).abs()).sum::<f64>().max(1e-12);
    SineSum {
        amplitudes: raw.iter().map(|a| a * lipschitz / scale).collect(),
        frequencies,
        phases: (0..k).map(|_| rng.gen_range(0.0..core::f64::consts::TAU)).collect(),
    }
}

/// Reverse exponent pair admissible at `β`: same signs for `β > 1`, opposite signs for
/// `β < 1`, with `p` at least [`EXPONENT_MARGIN`] from `0` and from `1 - e^{-2s}`.
pub fn reverse_pair<R: Rng + ?Sized>(rng: &mut R, beta: f64) -> Result<ExponentTriple> {
    if beta == 1.0 || !(beta > 0.0) {
        return Err(param("reverse pairs are sampled for beta != 1"));
    }
    loop {
        let (p, q) = if beta > 1.0 {
            if rng.gen_bool(0.5) {
                let p = rng.gen_range(-3.0..=-EXPONENT_MARGIN);
                (p, p - rng.gen_range(0.2..=2.0))
            } else {
                let p = rng.gen_range(0.2..=0.9);
                (p, rng.gen_range(EXPONENT_MARGIN..=p - 0.1))
            }
        } else {
            (rng.gen_range(0.2..=0.9), rng.gen_range(-3.0..=-EXPONENT_MARGIN))
        };
        // 1 - e^{-2s} = (p - q)/(1 - q)
        let threshold = (p - q) / (1.0 - q);
        if (p - threshold).abs() >= EXPONENT_MARGIN {
            return ExponentTriple::from_pq(p, q);
        }
    }
}

/// Symmetric potential `x²/2 + ε cos(ω x)` with `K = 1 - εω²`, `L = 1 + εω²`.
pub fn perturbed_quadratic(shape: GridShape, eps: f64, freq: f64) -> Result<PotentialSpec> {
    let spread = eps * freq * freq;
    if !(0.0..1.0).contains(&spread) {
        return Err(param("perturbation must keep the potential uniformly convex"));
    }
    let f = GridField::from_fn(shape, move |x| 0.5 * x[0] * x[0] + eps * cos(freq * x[0]))?;
    PotentialSpec::new(f, 1.0 - spread, 1.0 + spread)
}

pub fn perturbed_quadratic_random<R: Rng + ?Sized>(rng: &mut R, shape: GridShape) -> Result<PotentialSpec> {
    let freq = rng.gen_range(0.5..=1.5);
    let eps = rng.gen_range(0.0..=0.1) / (freq * freq);
    perturbed_quadratic(shape, eps, freq)
}

/// `log γ_β` in dimension one, for building tilts by hand.
pub fn log_gaussian_1d(x: f64, beta: f64) -> f64 {
    -0.5 * x * x / beta - 0.5 * (LN_2PI + ln(beta))
}

/// `1 - e^{-2s}`.
pub fn noise_level(s: f64) -> f64 {
    -expm1(-2.0 * s)
}
