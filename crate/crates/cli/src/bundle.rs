//! Report bundle written by every command.

use gauss_deficit_core::inequalities::DeficitReport;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A structural hypothesis failed, so the inequality is only measured.
    NotAsserted,
    /// The check could not be evaluated.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub item: usize,
    pub label: String,
    /// True when the input is an equality case of the bound.
    pub extremiser: bool,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(flatten)]
    pub report: Option<DeficitReport>,
}

impl ReportEntry {
    pub fn new(item: usize, label: String, extremiser: bool, outcome: Result<DeficitReport, String>, tol: f64) -> Self {
        let (verdict, error, report) = match outcome {
            Ok(r) if has_nan(&r) => (Verdict::Error, Some("report contains NaN".to_string()), None),
            Ok(r) => {
                let r = clamp_infinite(r);
                let verdict = match r.verdict(tol) {
                    Some(true) => Verdict::Pass,
                    Some(false) => Verdict::Fail,
                    None => Verdict::NotAsserted,
                };
                (verdict, None, Some(r))
            }
            Err(e) => (Verdict::Error, Some(e), None),
        };
        ReportEntry { item, label, extremiser, verdict, error, report }
    }
}

fn numbers(r: &DeficitReport) -> impl Iterator<Item = f64> + '_ {
    [r.lhs, r.rhs, r.sharp_constant, r.slack]
        .into_iter()
        .chain(r.hypotheses.iter().map(|h| h.margin))
        .chain(r.params.values().copied())
}

fn has_nan(r: &DeficitReport) -> bool {
    numbers(r).any(f64::is_nan)
}

/// JSON has no infinities; they are written as the largest finite value of the same sign.
fn clamp_infinite(mut r: DeficitReport) -> DeficitReport {
    let clamp = |x: &mut f64| {
        if x.is_infinite() {
            *x = f64::MAX.copysign(*x);
        }
    };
    for x in [&mut r.lhs, &mut r.rhs, &mut r.sharp_constant, &mut r.slack] {
        clamp(x);
    }
    r.hypotheses.iter_mut().for_each(|h| clamp(&mut h.margin));
    r.params.values_mut().for_each(clamp);
    r
}

/// Series for the commands that produce a table instead of checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub not_asserted: usize,
    pub errors: usize,
    /// Largest `|slack|` over the extremiser items that produced a report.
    pub max_abs_slack_at_extremisers: Option<f64>,
}

impl Summary {
    pub fn of(entries: &[ReportEntry]) -> Self {
        let mut s = Summary { total: entries.len(), ..Summary::default() };
        for e in entries {
            match e.verdict {
                Verdict::Pass => s.passed += 1,
                Verdict::Fail => s.failed += 1,
                Verdict::NotAsserted => s.not_asserted += 1,
                Verdict::Error => s.errors += 1,
            }
            if let (true, Some(r)) = (e.extremiser, &e.report) {
                let m = s.max_abs_slack_at_extremisers.unwrap_or(0.0).max(r.slack.abs());
                s.max_abs_slack_at_extremisers = Some(m);
            }
        }
        s
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0 && self.errors == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub config: RunConfig,
    pub reports: Vec<ReportEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    pub summary: Summary,
    pub timing_ms: f64,
}

impl ReportBundle {
    /// 0 when every asserted check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.all_pass() {
            0
        } else {
            1
        }
    }
}
