//! Deficit reports shared by every checker.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// Direction of the inequality being measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Sense {
    /// `lhs ≤ rhs`; slack is `rhs - lhs`.
    AtMost,
    /// `lhs ≥ rhs`; slack is `lhs - rhs`.
    AtLeast,
}

/// Outcome of one structural hypothesis check.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hypothesis {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
}

/// Both sides of an inequality instance, the constant involved and the hypothesis checks.
///
/// `slack ≥ 0` means the inequality holds. It is only asserted when every hypothesis passes.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeficitReport {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub sharp_constant: f64,
    pub slack: f64,
    pub sense: Sense,
    pub hypotheses: Vec<Hypothesis>,
    pub params: BTreeMap<String, f64>,
}

impl DeficitReport {
    pub fn new(inequality: impl Into<String>, lhs: f64, rhs: f64, sharp_constant: f64, sense: Sense) -> Self {
        let slack = match sense {
            Sense::AtMost => rhs - lhs,
            Sense::AtLeast => lhs - rhs,
        };
        Self {
            inequality: inequality.into(),
            lhs,
            rhs,
            sharp_constant,
            slack,
            sense,
            hypotheses: Vec::new(),
            params: BTreeMap::new(),
        }
    }

    pub fn hypothesis(mut self, name: impl Into<String>, pass: bool, margin: f64) -> Self {
        self.hypotheses.push(Hypothesis { name: name.into(), pass, margin });
        self
    }

    pub fn param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    pub fn hypotheses_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.pass)
    }

    /// `Some(slack ≥ -tol)` when the hypotheses pass, `None` when the inequality is not asserted.
    pub fn verdict(&self, tol: f64) -> Option<bool> {
        self.hypotheses_pass().then_some(self.slack >= -tol)
    }

    /// True unless the hypotheses pass and the slack is below `-tol`.
    pub fn consistent(&self, tol: f64) -> bool {
        self.verdict(tol).unwrap_or(true)
    }
}
