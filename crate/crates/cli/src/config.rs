//! Run configuration: command-line flags layered over an optional key=value file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Subcommand, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Forward regularised hypercontractivity at Gaussians and structured inputs.
    VerifyHc,
    /// Reverse regularised hypercontractivity.
    VerifyReverseHc,
    /// Log-Sobolev deficit.
    VerifyLsi,
    /// Entropy bound from the covariance eigenvalues.
    VerifyEls,
    /// Transport-entropy deficit.
    VerifyTalagrand,
    /// Planar checks with a diagonal matrix parameter (`--beta b1,b2`).
    VerifyMatrix,
    /// Improved Poincaré inequality.
    VerifyPoincare,
    /// Beckner-type inequality.
    VerifyBeckner,
    /// Dual Brascamp–Lieb form.
    VerifyBl,
    /// Hypercontractivity of the Hamilton–Jacobi flow.
    VerifyHj,
    /// Dual transport inequality through the Hopf–Lax semigroup.
    VerifyDualTalagrand,
    /// Log-Sobolev deficit for a perturbed quadratic potential.
    VerifyGeneralLsi,
    /// Monotone functional along the Fokker–Planck flow.
    FlowTrace,
    /// Table of the closed-form constants.
    SharpConstants,
    /// Two-bump mixture violating the covariance-only bound.
    CounterexampleMixture,
    /// Log-harmonic datum whose semigroup image is not log-superharmonic.
    CounterexampleSuperharmonic,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Which inputs a verification suite runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Inputs {
    /// Extremisers followed by `count` seeded random inputs.
    #[default]
    All,
    /// Extremisers only.
    Gaussian,
    /// Seeded random inputs only.
    Random,
}

#[derive(Debug, Parser)]
#[command(name = "gauss-deficit", version, about = "Numerical deficits of Gaussian functional inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Every flag is optional so that a config file can supply it.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Regularity parameter(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub beta: Option<Vec<f64>>,
    /// Source exponent.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Target exponent.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Time parameter: Hopf–Lax time, or flow time for the superharmonic trace.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Exponent `a` of the Hamilton–Jacobi check, or mixture offsets; comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
    /// Number of seeded random inputs per parameter value.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Base seed; item k draws from stream k.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Lower grid bound.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_lo: Option<f64>,
    /// Upper grid bound.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_hi: Option<f64>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Gauss–Hermite nodes per axis.
    #[arg(long, global = true)]
    pub gh_nodes: Option<usize>,
    /// Slack tolerance of the pass/fail verdict.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Which inputs to run.
    #[arg(long, global = true, value_enum)]
    pub inputs: Option<Inputs>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; defaults to the extension of `--out`, then JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat key=value file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Fully resolved configuration; echoed in every report bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub beta: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub tau: Option<f64>,
    pub a: Option<Vec<f64>>,
    pub count: usize,
    pub seed: u64,
    pub grid_lo: Option<f64>,
    pub grid_hi: Option<f64>,
    pub grid_n: Option<usize>,
    pub gh_nodes: Option<usize>,
    pub tol: Option<f64>,
    pub inputs: Inputs,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_COUNT: usize = 20;

const KEYS: [&str; 15] = [
    "beta", "p", "q", "tau", "a", "count", "seed", "grid-lo", "grid-hi", "grid-n", "gh-nodes", "tol", "inputs", "out",
    "format",
];

impl RunConfig {
    /// Defaults for `command` with nothing overridden.
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            beta: None,
            p: None,
            q: None,
            tau: None,
            a: None,
            count: DEFAULT_COUNT,
            seed: 0,
            grid_lo: None,
            grid_hi: None,
            grid_n: None,
            gh_nodes: None,
            tol: None,
            inputs: Inputs::All,
            out: None,
            format: Format::Json,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let mut flags = match &cli.flags.config {
            Some(path) => parse_config_file(path)?,
            None => Flags::default(),
        };
        flags.overlay(cli.flags);
        Self::resolve(cli.command, flags)
    }

    fn resolve(command: Command, f: Flags) -> Result<Self, CliError> {
        let format = match (f.format, &f.out) {
            (Some(fmt), _) => fmt,
            (None, Some(path)) => format_from_extension(path).unwrap_or(Format::Json),
            (None, None) => Format::Json,
        };
        let cfg = RunConfig {
            command,
            beta: f.beta,
            p: f.p,
            q: f.q,
            tau: f.tau,
            a: f.a,
            count: f.count.unwrap_or(DEFAULT_COUNT),
            seed: f.seed.unwrap_or(0),
            grid_lo: f.grid_lo,
            grid_hi: f.grid_hi,
            grid_n: f.grid_n,
            gh_nodes: f.gh_nodes,
            tol: f.tol,
            inputs: f.inputs.unwrap_or_default(),
            out: f.out,
            format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let finite = |name: &str, v: Option<f64>| match v {
            Some(x) if !x.is_finite() => Err(CliError::Usage(format!("{name} must be finite"))),
            _ => Ok(()),
        };
        for (name, v) in [("p", self.p), ("q", self.q), ("grid-lo", self.grid_lo), ("grid-hi", self.grid_hi)] {
            finite(name, v)?;
        }
        for (name, list) in [("beta", &self.beta), ("a", &self.a)] {
            if let Some(list) = list {
                if list.is_empty() || list.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::Usage(format!("{name} needs finite values")));
                }
            }
        }
        if let Some(b) = &self.beta {
            if b.iter().any(|x| *x <= 0.0) {
                return Err(CliError::Usage("beta must be positive".into()));
            }
        }
        if matches!(self.tau, Some(t) if !(t > 0.0 && t.is_finite())) {
            return Err(CliError::Usage("tau must be positive".into()));
        }
        if matches!(self.tol, Some(t) if !(t >= 0.0 && t.is_finite())) {
            return Err(CliError::Usage("tol must be non-negative".into()));
        }
        if matches!(self.gh_nodes, Some(0)) {
            return Err(CliError::Usage("gh-nodes must be positive".into()));
        }
        Ok(())
    }
}

impl Flags {
    /// Replaces every field that `top` sets.
    fn overlay(&mut self, top: Flags) {
        macro_rules! take {
            ($($field:ident),*) => { $( if top.$field.is_some() { self.$field = top.$field; } )* };
        }
        take!(beta, p, q, tau, a, count, seed, grid_lo, grid_hi, grid_n, gh_nodes, tol, inputs, out, format, config);
    }
}

fn format_from_extension(path: &Path) -> Option<Format> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "json" => Some(Format::Json),
        "csv" => Some(Format::Csv),
        _ => None,
    }
}

fn parse_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parses `key = value` lines; `#` starts a comment and `_` in keys reads as `-`.
pub fn parse_config(text: &str) -> Result<Flags, CliError> {
    let mut flags = Flags::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", lineno + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if !KEYS.contains(&key.as_str()) {
            return Err(bad(format!("unknown key `{key}`")));
        }
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("`{key}` needs a number, got `{v}`")));
        let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("`{key}` needs an integer, got `{v}`")));
        let list = |v: &str| v.split(',').map(|x| num(x.trim())).collect::<Result<Vec<_>, _>>();
        let choice = |v: &str| bad(format!("invalid value `{v}` for `{key}`"));
        match key.as_str() {
            "beta" => flags.beta = Some(list(value)?),
            "a" => flags.a = Some(list(value)?),
            "p" => flags.p = Some(num(value)?),
            "q" => flags.q = Some(num(value)?),
            "tau" => flags.tau = Some(num(value)?),
            "tol" => flags.tol = Some(num(value)?),
            "grid-lo" => flags.grid_lo = Some(num(value)?),
            "grid-hi" => flags.grid_hi = Some(num(value)?),
            "count" => flags.count = Some(int(value)? as usize),
            "seed" => flags.seed = Some(int(value)?),
            "grid-n" => flags.grid_n = Some(int(value)? as usize),
            "gh-nodes" => flags.gh_nodes = Some(int(value)? as usize),
            "inputs" => flags.inputs = Some(Inputs::from_str(value, true).map_err(|_| choice(value))?),
            "format" => flags.format = Some(Format::from_str(value, true).map_err(|_| choice(value))?),
            "out" => flags.out = Some(PathBuf::from(value)),
            _ => unreachable!("key list and match arms agree"),
        }
    }
    Ok(flags)
}
