//! Named suites: each command expands into an ordered list of independent jobs.

use gauss_deficit_core::flows::{certify, preservation_trace, CertificateKind, MeasureSpec};
use gauss_deficit_core::functionals::{
    q_functional, q_monotonicity, sharp_constant, ConstantName, ConstantParams, Monotonicity,
};
use gauss_deficit_core::generators::{
    fp_random, lipschitz_random, log_concave_random, perturbed_quadratic, perturbed_quadratic_random, positive_random,
    reverse_pair, talagrand_admissible, ATOM_RANGE,
};
use gauss_deficit_core::hamilton_jacobi::{dual_extremiser, dual_talagrand_check, hc_extremiser, hj_hc_check, HJField};
use gauss_deficit_core::inequalities::{
    beckner_check, bl_data, bl_extremal_partner, brascamp_lieb_check, counterexample_mixture,
    counterexample_superharmonic, els_eigen_check, hc_check, lsi_check, matrix_check, poincare_check, reverse_hc_check,
    DeficitReport, MatrixInequality, MatrixSide, Sense, SLACK_TOL, SLACK_TOL_2D,
};
use gauss_deficit_core::numerics::{
    gauss_hermite_rule, Grid1D, GridField, GridShape, LogQuad, LogQuadMix, QuadratureRule,
};
use gauss_deficit_core::semigroups::ExponentTriple;
use gauss_deficit_core::transport::{general_lsi_deficit, talagrand_deficit, DensitySpec};
use gauss_deficit_core::Result as CoreResult;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bundle::{Table, TableRow};
use crate::config::{Command, Inputs, RunConfig};
use crate::error::CliError;

/// Looser verdict tolerance for planar checks and the applications.
const APPLICATION_TOL: f64 = 1e-4;
/// Relative drop allowed between consecutive values of the flow functional.
const MONOTONE_TOL: f64 = 1e-5;

type Runner = Box<dyn Fn(&mut ChaCha8Rng) -> CoreResult<DeficitReport> + Send + Sync>;

/// One check; its random stream depends only on the seed and its position.
pub struct Job {
    pub label: String,
    pub extremiser: bool,
    pub tol: f64,
    run: Runner,
}

impl Job {
    pub fn run(&self, seed: u64, item: usize) -> Result<DeficitReport, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(item as u64);
        (self.run)(&mut rng).map_err(|e| e.to_string())
    }
}

/// Jobs plus an optional table computed up front.
#[derive(Default)]
pub struct Plan {
    pub jobs: Vec<Job>,
    pub table: Option<Table>,
}

impl Plan {
    fn push(
        &mut self,
        label: impl Into<String>,
        extremiser: bool,
        tol: f64,
        run: impl Fn(&mut ChaCha8Rng) -> CoreResult<DeficitReport> + Send + Sync + 'static,
    ) {
        self.jobs.push(Job { label: label.into(), extremiser, tol, run: Box::new(run) });
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
}

impl Ctx<'_> {
    fn grid(&self, lo: f64, hi: f64, n: usize) -> Result<Grid1D, CliError> {
        let c = self.cfg;
        Grid1D::new(c.grid_lo.unwrap_or(lo), c.grid_hi.unwrap_or(hi), c.grid_n.unwrap_or(n)).map_err(usage)
    }

    fn line(&self, lo: f64, hi: f64, n: usize) -> Result<GridShape, CliError> {
        Ok(GridShape::Line(self.grid(lo, hi, n)?))
    }

    /// Line wide enough for the random inputs at `beta` unless the grid is given.
    fn line_for(&self, beta: f64, n: usize) -> Result<GridShape, CliError> {
        let r = reach(beta, 16.0);
        self.line(-r, r, n)
    }

    fn plane(&self, lo: f64, hi: f64, n: usize) -> Result<GridShape, CliError> {
        let g = self.grid(lo, hi, n)?;
        GridShape::square(g.lo(), g.hi(), g.len()).map_err(usage)
    }

    fn rule(&self, nodes: usize) -> Result<QuadratureRule, CliError> {
        gauss_hermite_rule(self.cfg.gh_nodes.unwrap_or(nodes)).map_err(usage)
    }

    fn betas(&self, default: &[f64]) -> Vec<f64> {
        self.cfg.beta.clone().unwrap_or_else(|| default.to_vec())
    }

    fn tol(&self, default: f64) -> f64 {
        self.cfg.tol.unwrap_or(default)
    }

    fn extremisers(&self) -> bool {
        self.cfg.inputs != Inputs::Random
    }

    fn randoms(&self) -> usize {
        if self.cfg.inputs == Inputs::Gaussian {
            0
        } else {
            self.cfg.count
        }
    }

    fn triple(&self, p: f64, q: f64) -> Result<ExponentTriple, CliError> {
        ExponentTriple::from_pq(self.cfg.p.unwrap_or(p), self.cfg.q.unwrap_or(q)).map_err(usage)
    }

    fn given_triple(&self) -> Result<Option<ExponentTriple>, CliError> {
        match (self.cfg.p, self.cfg.q) {
            (Some(p), Some(q)) => ExponentTriple::from_pq(p, q).map(Some).map_err(usage),
            (None, None) => Ok(None),
            _ => Err(CliError::Usage("give both --p and --q".into())),
        }
    }
}

/// Input with the structure matching `β`: a regularised-class member for `β > 1`, a
/// semi-log-concave tilt for `β < 1`, an unstructured mixture at `β = 1`.
fn structured(rng: &mut ChaCha8Rng, beta: f64, shape: &GridShape, rule: &QuadratureRule) -> CoreResult<GridField> {
    if beta > 1.0 {
        fp_random(rng, beta, shape, rule)
    } else if beta < 1.0 {
        log_concave_random(rng, beta, *shape)
    } else {
        positive_random(rng, *shape)
    }
}

/// Half-width covering the regularised-class members at `beta`: atoms within
/// `ATOM_RANGE`, kernel spread `√β`.
fn reach(beta: f64, floor: f64) -> f64 {
    floor.max(ATOM_RANGE + 8.0 * beta.sqrt())
}

fn structured_name(beta: f64) -> &'static str {
    if beta > 1.0 {
        "fp-random"
    } else if beta < 1.0 {
        "log-concave-random"
    } else {
        "positive-random"
    }
}

/// `(v/γ)^{1/r}` as a field, keeping an exact evaluator.
fn ratio_root(v: GridField, r: f64) -> CoreResult<GridField> {
    let shape = *v.shape();
    GridField::from_log_fn(shape, move |x| {
        let sq: f64 = x.iter().map(|t| t * t).sum();
        let log_gauss = -0.5 * sq - 0.5 * x.len() as f64 * (2.0 * std::f64::consts::PI).ln();
        (v.log_at(x) - log_gauss) / r
    })
}

pub fn plan(cfg: &RunConfig) -> Result<Plan, CliError> {
    let ctx = Ctx { cfg };
    match cfg.command {
        Command::VerifyHc => verify_hc(&ctx),
        Command::VerifyReverseHc => verify_reverse_hc(&ctx),
        Command::VerifyLsi => single_density(&ctx, "lsi", |_| true, lsi_check),
        // only variances up to 1 enter the correction, so γ_β is sharp for β ≤ 1
        Command::VerifyEls => single_density(&ctx, "els", |beta| beta <= 1.0, |v, _, rule| els_eigen_check(v, rule)),
        Command::VerifyTalagrand => verify_talagrand(&ctx),
        Command::VerifyMatrix => verify_matrix(&ctx),
        Command::VerifyPoincare => verify_poincare(&ctx),
        Command::VerifyBeckner => verify_beckner(&ctx),
        Command::VerifyBl => verify_bl(&ctx),
        Command::VerifyHj => verify_hj(&ctx),
        Command::VerifyDualTalagrand => verify_dual_talagrand(&ctx),
        Command::VerifyGeneralLsi => verify_general_lsi(&ctx),
        Command::FlowTrace => flow_trace(&ctx),
        Command::SharpConstants => sharp_constants(&ctx),
        Command::CounterexampleMixture => mixture(&ctx),
        Command::CounterexampleSuperharmonic => superharmonic(&ctx),
    }
}

fn verify_hc(ctx: &Ctx) -> Result<Plan, CliError> {
    let triple = ctx.triple(2.0, 4.0)?;
    single_density(ctx, "hc", |_| true, move |v, beta, rule| hc_check(v, beta, &triple, rule))
}

/// Extremiser `γ_β` and structured random inputs for checks taking one density.
fn single_density(
    ctx: &Ctx,
    name: &str,
    sharp_at: fn(f64) -> bool,
    check: impl Fn(&GridField, f64, &QuadratureRule) -> CoreResult<DeficitReport> + Send + Sync + Clone + 'static,
) -> Result<Plan, CliError> {
    let rule = ctx.rule(96)?;
    let tol = ctx.tol(SLACK_TOL);
    let mut plan = Plan::default();
    for beta in ctx.betas(&[0.5, 2.0]) {
        let shape = ctx.line_for(beta, 4097)?;
        if ctx.extremisers() {
            let (check, rule) = (check.clone(), rule.clone());
            plan.push(format!("{name} gamma beta={beta}"), sharp_at(beta), tol, move |_| {
                check(&GridField::gaussian(shape, beta)?, beta, &rule)
            });
        }
        for k in 0..ctx.randoms() {
            let (check, rule) = (check.clone(), rule.clone());
            plan.push(format!("{name} {} #{k} beta={beta}", structured_name(beta)), false, tol, move |rng| {
                check(&structured(rng, beta, &shape, &rule)?, beta, &rule)
            });
        }
    }
    Ok(plan)
}

fn verify_reverse_hc(ctx: &Ctx) -> Result<Plan, CliError> {
    let rule = ctx.rule(96)?;
    let tol = ctx.tol(SLACK_TOL);
    let given = ctx.given_triple()?;
    let mut plan = Plan::default();
    for beta in ctx.betas(&[0.5, 2.0]) {
        let shape = ctx.line_for(beta, 4097)?;
        let fixed = match given {
            Some(t) => t,
            None if beta < 1.0 => ExponentTriple::from_pq(0.5, -1.0).map_err(usage)?,
            None => ExponentTriple::from_pq(-1.0, -3.0).map_err(usage)?,
        };
        if ctx.extremisers() {
            let rule = rule.clone();
            plan.push(format!("reverse-hc gamma beta={beta}"), true, tol, move |_| {
                reverse_hc_check(&GridField::gaussian(shape, beta)?, beta, &fixed, &rule)
            });
        }
        for k in 0..ctx.randoms() {
            let rule = rule.clone();
            plan.push(format!("reverse-hc {} #{k} beta={beta}", structured_name(beta)), false, tol, move |rng| {
                let v = structured(rng, beta, &shape, &rule)?;
                let t = match given {
                    None if beta != 1.0 => reverse_pair(rng, beta)?,
                    _ => fixed,
                };
                reverse_hc_check(&v, beta, &t, &rule)
            });
        }
    }
    Ok(plan)
}

fn verify_talagrand(ctx: &Ctx) -> Result<Plan, CliError> {
    let rule = ctx.rule(96)?;
    let tol = ctx.tol(SLACK_TOL);
    let mut plan = Plan::default();
    for beta in ctx.betas(&[0.5, 2.0]) {
        let shape = ctx.line_for(beta, 4097)?;
        if ctx.extremisers() {
            let rule = rule.clone();
            plan.push(format!("talagrand gamma beta={beta}"), true, tol, move |_| {
                talagrand_deficit(&DensitySpec::new(GridField::gaussian(shape, beta)?)?, beta, &rule)
            });
        }
        for k in 0..ctx.randoms() {
            let rule = rule.clone();
            let name = if beta == 1.0 { "positive-random" } else { "admissible-random" };
            plan.push(format!("talagrand {name} #{k} beta={beta}"), false, tol, move |rng| {
                let v = if beta == 1.0 {
                    DensitySpec::normalized(positive_random(rng, shape)?)?
                } else {
                    DensitySpec::new(talagrand_admissible(rng, beta).field(shape)?)?
                };
                talagrand_deficit(&v, beta, &rule)
            });
        }
    }
    Ok(plan)
}

fn verify_matrix(ctx: &Ctx) -> Result<Plan, CliError> {
    let b = match ctx.betas(&[2.0, 4.0]).as_slice() {
        [x] => [*x, *x],
        [x, y] => [*x, *y],
        _ => return Err(CliError::Usage("verify-matrix takes one or two beta values".into())),
    };
    let side = if b.iter().all(|x| *x <= 1.0) { MatrixSide::Concave } else { MatrixSide::Convex };
    let triple = ctx.triple(2.0, 4.0)?;
    let r = reach(b[0].max(b[1]), 12.0);
    let plane = ctx.plane(-r, r, 385)?;
    let line = match plane {
        GridShape::Plane(g, _) => GridShape::Line(g),
        GridShape::Line(_) => unreachable!("square builds a plane"),
    };
    let rule = ctx.rule(40)?;
    let line_rule = gauss_hermite_rule(96).map_err(usage)?;
    let tol = ctx.tol(SLACK_TOL_2D);
    let mut plan = Plan::default();
    let kinds =
        [(MatrixInequality::Hc, "hc"), (MatrixInequality::Lsi, "lsi"), (MatrixInequality::Talagrand, "talagrand")];
    if ctx.extremisers() {
        for (which, name) in kinds {
            let rule = rule.clone();
            plan.push(format!("matrix-{name} gamma B={b:?}"), true, tol, move |_| {
                let v = GridField::from_log_quad(plane, LogQuadMix::single(LogQuad::gaussian_diag(b)?))?;
                matrix_check(&v, b, Some(&triple), which, side, &rule)
            });
        }
    }
    let seed = ctx.cfg.seed;
    for k in 0..ctx.randoms() {
        for (which, name) in kinds {
            let (rule, line_rule) = (rule.clone(), line_rule.clone());
            plan.push(format!("matrix-{name} product-random #{k} B={b:?}"), false, tol, move |_| {
                // the same two factors for all three checks of input k
                let mut factors = ChaCha8Rng::seed_from_u64(seed);
                factors.set_stream((1 << 32) | k as u64);
                let f1 = structured(&mut factors, b[0], &line, &line_rule)?;
                let f2 = structured(&mut factors, b[1], &line, &line_rule)?;
                let v = GridField::from_log_fn(plane, move |x| f1.log_at(&x[..1]) + f2.log_at(&x[1..2]))?;
                matrix_check(&v, b, Some(&triple), which, side, &rule)
            });
        }
    }
    Ok(plan)
}

fn verify_poincare(ctx: &Ctx) -> Result<Plan, CliError> {
    ratio_suite(ctx, "poincare", 2.0, &[2.0, 25.0], poincare_check)
}

fn verify_beckner(ctx: &Ctx) -> Result<Plan, CliError> {
    let p = ctx.cfg.p.unwrap_or(1.5);
    if !(p > 1.0 && p < 2.0) {
        return Err(CliError::Usage("verify-beckner needs 1 < p < 2".into()));
    }
    ratio_suite(ctx, "beckner", p, &[2.0], move |f, beta, rule| beckner_check(f, p, beta, rule))
}

/// Functions `f = (v/γ)^{1/r}` for the Gaussian ratio and structured densities `v`, so
/// that the hypothesis on `γ f^r` is the structure of `v`.
fn ratio_suite(
    ctx: &Ctx,
    name: &str,
    r: f64,
    default_betas: &[f64],
    check: impl Fn(&GridField, f64, &QuadratureRule) -> CoreResult<DeficitReport> + Send + Sync + Clone + 'static,
) -> Result<Plan, CliError> {
    let rule = ctx.rule(96)?;
    let tol = ctx.tol(SLACK_TOL);
    let mut plan = Plan::default();
    for beta in ctx.betas(default_betas) {
        let shape = ctx.line_for(beta, 4097)?;
        if ctx.extremisers() {
            let (check, rule) = (check.clone(), rule.clone());
            plan.push(format!("{name} gaussian-ratio beta={beta}"), false, tol, move |_| {
                check(&ratio_root(GridField::gaussian(shape, beta)?, r)?, beta, &rule)
            });
        }
        for k in 0..ctx.randoms() {
            let (check, rule) = (check.clone(), rule.clone());
            plan.push(format!("{name} {} #{k} beta={beta}", structured_name(beta)), false, tol, move |rng| {
                check(&ratio_root(structured(rng, beta, &shape, &rule)?, r)?, beta, &rule)
            });
        }
    }
    Ok(plan)
}

fn verify_bl(ctx: &Ctx) -> Result<Plan, CliError> {
    let triple = ctx.triple(2.0, 4.0)?;
    bl_data(&triple).map_err(usage)?;
    let shape = ctx.line(-20.0, 20.0, 1201)?;
    let rule = ctx.rule(96)?;
    let tol = ctx.tol(APPLICATION_TOL);
    let mut plan = Plan::default();
    for beta in ctx.betas(&[2.0]) {
        if ctx.extremisers() {
            plan.push(format!("bl extremal-pair beta={beta}"), true, tol, move |_| {
                let f1 = GridField::gaussian(shape, beta)?;
                brascamp_lieb_check(&f1, &bl_extremal_partner(shape, beta, &triple)?, &triple, beta)
            });
        }
        for k in 0..ctx.randoms() {
            let rule = rule.clone();
            plan.push(format!("bl {} #{k} beta={beta}", structured_name(beta)), false, tol, move |rng| {
                let f1 = structured(rng, beta, &shape, &rule)?;
                let f2 = positive_random(rng, shape)?;
                brascamp_lieb_check(&f1, &f2, &triple, beta)
            });
        }
    }
    Ok(plan)
}

/// Random convex bump `w ln cosh(r(x - c))`; adding it keeps every lower curvature bound.
fn convex_bump(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
    let (w, r, c) = (rng.gen_range(0.0..=0.5), rng.gen_range(0.3..=1.5), rng.gen_range(-1.0..=1.0));
    move |x: f64| {
        let u = (r * (x - c)).abs();
        w * (u + (-2.0 * u).exp().ln_1p() - std::f64::consts::LN_2)
    }
}

fn verify_hj(ctx: &Ctx) -> Result<Plan, CliError> {
    let grid = ctx.grid(-12.0, 12.0, 2049)?;
    let tau = ctx.cfg.tau.unwrap_or(1.0);
    let tol = ctx.tol(APPLICATION_TOL);
    let mut plan = Plan::default();
    for beta in ctx.betas(&[2.0]) {
        for a in ctx.cfg.a.clone().unwrap_or_else(|| vec![1.0]) {
            if ctx.extremisers() {
                plan.push(format!("hj-hc extremiser a={a} beta={beta}"), true, tol, move |_| {
                    hj_hc_check(&hc_extremiser(grid, a, beta)?, a, tau, beta)
                });
            }
            for k in 0..ctx.randoms() {
                plan.push(format!("hj-hc perturbed #{k} a={a} beta={beta}"), false, tol, move |rng| {
                    let base = hc_extremiser(grid, a, beta)?.field().clone();
                    let bump = convex_bump(rng);
                    let f = HJField::from_fn(grid, move |x| base.value_at(&[x]) + bump(x))?;
                    hj_hc_check(&f, a, tau, beta)
                });
            }
        }
    }
    Ok(plan)
}

fn verify_dual_talagrand(ctx: &Ctx) -> Result<Plan, CliError> {
    let grid = ctx.grid(-12.0, 12.0, 2049)?;
    let tau = ctx.cfg.tau.unwrap_or(1.0);
    let tol = ctx.tol(APPLICATION_TOL);
    let mut plan = Plan::default();
    for beta in ctx.betas(&[2.0]) {
        if beta < 1.0 {
            return Err(CliError::Usage("verify-dual-talagrand needs beta >= 1".into()));
        }
        if ctx.extremisers() {
            plan.push(format!("dual-talagrand extremiser beta={beta}"), true, tol, move |_| {
                dual_talagrand_check(&dual_extremiser(grid, beta)?, tau, beta)
            });
        }
        for k in 0..ctx.randoms() {
            let name = if beta == 1.0 { "lipschitz-random" } else { "perturbed" };
            plan.push(format!("dual-talagrand {name} #{k} beta={beta}"), false, tol, move |rng| {
                let f = if beta == 1.0 {
                    let s = lipschitz_random(rng, 1.5);
                    HJField::from_fn(grid, move |x| s.value(x))?
                } else {
                    let base = dual_extremiser(grid, beta)?.field().clone();
                    let bump = convex_bump(rng);
                    HJField::from_fn(grid, move |x| base.value_at(&[x]) + bump(x))?
                };
                dual_talagrand_check(&f, tau, beta)
            });
        }
    }
    Ok(plan)
}

fn verify_general_lsi(ctx: &Ctx) -> Result<Plan, CliError> {
    let shape = ctx.line(-16.0, 16.0, 4097)?;
    let tol = ctx.tol(APPLICATION_TOL);
    let mut plan = Plan::default();
    for beta in ctx.betas(&[2.0]) {
        if beta.is_nan() || beta <= 1.0 {
            return Err(CliError::Usage("verify-general-lsi needs beta > 1".into()));
        }
        if ctx.extremisers() {
            plan.push(format!("general-lsi quadratic beta={beta}"), true, tol, move |_| {
                let pot = perturbed_quadratic(shape, 0.0, 1.0)?;
                general_lsi_deficit(&DensitySpec::new(GridField::gaussian(shape, beta)?)?, &pot, beta)
            });
        }
        for k in 0..ctx.randoms() {
            plan.push(format!("general-lsi perturbed-quadratic #{k} beta={beta}"), false, tol, move |rng| {
                let pot = perturbed_quadratic_random(rng, shape)?;
                // flat enough that (log v)'' ≥ -K/β
                let b = beta * pot.l() / pot.k() * rng.gen_range(1.0..=1.5);
                let v = DensitySpec::new(GridField::from_values(shape, pot.tilted(b))?)?;
                general_lsi_deficit(&v, &pot, beta)
            });
        }
    }
    Ok(plan)
}

/// Times `0.02 · 2^k`, `k = 0..8`.
pub fn flow_times() -> Vec<f64> {
    (0..8).map(|k| 0.02 * f64::powi(2.0, k)).collect()
}

fn flow_trace(ctx: &Ctx) -> Result<Plan, CliError> {
    let beta = match ctx.betas(&[2.0]).as_slice() {
        [b] => *b,
        _ => return Err(CliError::Usage("flow-trace takes a single beta".into())),
    };
    let triple = ctx.triple(2.0, 4.0)?;
    let direction = q_monotonicity(beta, &triple)
        .ok_or_else(|| CliError::Usage(format!("no monotonicity statement for beta={beta} at these exponents")))?;
    let kind = if beta > 1.0 { CertificateKind::Subharmonic } else { CertificateKind::Concave };
    let shape = ctx.line(-12.0, 12.0, 4097)?;
    let rule = ctx.rule(64)?;
    let gaussian = ctx.cfg.inputs == Inputs::Gaussian;
    let v0 = if gaussian {
        GridField::gaussian(shape, beta).map_err(usage)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
        structured(&mut rng, beta, &shape, &rule).map_err(usage)?
    };
    let mu = MeasureSpec::Density(v0);
    let times = flow_times();
    let err = |e: gauss_deficit_core::Error| CliError::Usage(format!("flow-trace: {e}"));
    let trace = preservation_trace(&mu, beta, kind, &times, &shape, &rule).map_err(err)?;
    let q: Vec<f64> = times
        .iter()
        .map(|t| q_functional(&mu, beta, &triple, *t, &shape, &rule))
        .collect::<CoreResult<_>>()
        .map_err(err)?;
    let sign = if direction == Monotonicity::NonDecreasing { 1.0 } else { -1.0 };
    let worst = q.windows(2).map(|w| sign * (w[1] - w[0]) / w[0].abs()).fold(f64::INFINITY, f64::min);
    let initial = match &mu {
        MeasureSpec::Density(v) => certify(v, kind, beta, None).map_err(err)?,
        _ => unreachable!("the trace starts from a density"),
    };
    let rows = (0..times.len())
        .map(|i| TableRow {
            label: String::new(),
            values: vec![Some(times[i]), Some(q[i]), Some(trace.margins[i]), Some(trace.masses[i])],
        })
        .collect();
    let report = DeficitReport::new("q-monotonicity", worst, -MONOTONE_TOL, 0.0, Sense::AtLeast)
        .param("beta", beta)
        .param("p", triple.p())
        .param("q", triple.q())
        .param("direction", sign)
        .hypothesis("initial-certificate", initial.passed, initial.margin);
    let mut plan = Plan {
        jobs: Vec::new(),
        table: Some(Table { columns: ["t", "Q", "margin", "mass"].map(String::from).to_vec(), rows }),
    };
    let label = format!("flow-trace {} beta={beta}", if gaussian { "gamma" } else { structured_name(beta) });
    plan.push(label, gaussian, 0.0, move |_| Ok(report.clone()));
    Ok(plan)
}

fn sharp_constants(ctx: &Ctx) -> Result<Plan, CliError> {
    let (p, q) = (ctx.cfg.p.unwrap_or(2.0), ctx.cfg.q.unwrap_or(4.0));
    let triple = ExponentTriple::from_pq(p, q).map_err(usage)?;
    let bl = bl_data(&triple).ok().map(|d| (d.c1, d.c2, triple.s()));
    let beckner_p = if p > 1.0 && p < 2.0 { p } else { 1.5 };
    let tau = ctx.cfg.tau.unwrap_or(1.0);
    let mut rows = Vec::new();
    for beta in ctx.betas(&[0.25, 0.5, 2.0, 4.0]) {
        for name in ConstantName::ALL {
            let mut params = ConstantParams::new(1, beta);
            let (mut cp, mut cq, mut ct) = (None, None, None);
            match name {
                ConstantName::HcRatio => {
                    params.exponents = Some((p, q));
                    (cp, cq) = (Some(p), Some(q));
                }
                ConstantName::BecknerB => {
                    params.p = Some(beckner_p);
                    cp = Some(beckner_p);
                }
                ConstantName::HjT => {
                    params.tau = Some(tau);
                    ct = Some(tau);
                }
                ConstantName::BlH => {
                    params.bl = bl;
                    (cp, cq) = (Some(p), Some(q));
                }
                _ => {}
            }
            let value = sharp_constant(name, &params).ok().map(|c| c.value);
            rows.push(TableRow {
                label: name.as_str().to_string(),
                values: vec![Some(1.0), Some(beta), cp, cq, ct, value],
            });
        }
    }
    let columns = ["n", "beta", "p", "q", "tau", "value"].map(String::from).to_vec();
    Ok(Plan { jobs: Vec::new(), table: Some(Table { columns, rows }) })
}

fn mixture(ctx: &Ctx) -> Result<Plan, CliError> {
    let shape = ctx.line(-24.0, 24.0, 4097)?;
    let rule = ctx.rule(96)?;
    let tol = ctx.tol(SLACK_TOL);
    let mut plan = Plan::default();
    for a in ctx.cfg.a.clone().unwrap_or_else(|| vec![0.0, 1.0, 2.0, 4.0]) {
        let rule = rule.clone();
        plan.push(format!("mixture a={a}"), a == 0.0, tol, move |_| counterexample_mixture(a, shape, &rule));
    }
    Ok(plan)
}

fn superharmonic(ctx: &Ctx) -> Result<Plan, CliError> {
    let shape = ctx.plane(-6.0, 6.0, 241)?;
    let times = match ctx.cfg.tau {
        Some(t) => vec![t],
        None => vec![0.1, 0.5],
    };
    let trace = counterexample_superharmonic(&times, shape).map_err(usage)?;
    let rows = (0..times.len())
        .map(|i| TableRow {
            label: String::new(),
            values: vec![
                Some(trace.times[i]),
                Some(trace.laplacian_range[i].0),
                Some(trace.laplacian_range[i].1),
                Some(trace.predicted[i]),
                Some(trace.margins[i]),
            ],
        })
        .collect();
    let columns = ["t", "laplacian_min", "laplacian_max", "predicted", "margin"].map(String::from).to_vec();
    Ok(Plan { jobs: Vec::new(), table: Some(Table { columns, rows }) })
}
