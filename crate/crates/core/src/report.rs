//! Structured results of identity, inequality and condition checks.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CheckKind {
    /// `pass ⇔ |residual| ≤ tolerance`.
    Identity,
    /// `pass ⇔ margin ≥ −tolerance − error_bar`.
    Inequality,
    /// A pointwise sufficient condition; its margin is reported, never enforced.
    Condition,
    /// A number recorded for regression diffing.
    Measurement,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    /// Residual for identities, `lhs − rhs` otherwise.
    pub margin: f64,
    pub tolerance: f64,
    pub error_bar: f64,
    pub pass: bool,
    /// Whether this check decides the overall exit status.
    pub gating: bool,
    pub breakdown: Vec<(String, f64)>,
    pub note: String,
}

impl VerificationReport {
    pub fn identity(name: impl Into<String>, lhs: f64, rhs: f64, residual: f64, tolerance: f64) -> Self {
        VerificationReport {
            name: name.into(),
            kind: CheckKind::Identity,
            lhs,
            rhs,
            margin: residual,
            tolerance,
            error_bar: 0.0,
            pass: false,
            gating: true,
            breakdown: Vec::new(),
            note: String::new(),
        }
        .evaluated()
    }

    pub fn inequality(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, error_bar: f64) -> Self {
        VerificationReport {
            name: name.into(),
            kind: CheckKind::Inequality,
            lhs,
            rhs,
            margin: lhs - rhs,
            tolerance,
            error_bar,
            pass: false,
            gating: true,
            breakdown: Vec::new(),
            note: String::new(),
        }
        .evaluated()
    }

    /// A sufficient condition with its minimum margin; `pass` records whether it holds.
    pub fn condition(name: impl Into<String>, margin: f64, tolerance: f64) -> Self {
        VerificationReport {
            name: name.into(),
            kind: CheckKind::Condition,
            lhs: margin,
            rhs: 0.0,
            margin,
            tolerance,
            error_bar: 0.0,
            pass: false,
            gating: false,
            breakdown: Vec::new(),
            note: String::new(),
        }
        .evaluated()
    }

    pub fn measurement(name: impl Into<String>, value: f64) -> Self {
        VerificationReport {
            name: name.into(),
            kind: CheckKind::Measurement,
            lhs: value,
            rhs: 0.0,
            margin: value,
            tolerance: 0.0,
            error_bar: 0.0,
            pass: true,
            gating: false,
            breakdown: Vec::new(),
            note: String::new(),
        }
    }

    /// Recomputes `pass` from the stored numbers.
    pub fn evaluated(mut self) -> Self {
        self.pass = match self.kind {
            CheckKind::Identity => math::abs(self.margin) <= self.tolerance,
            CheckKind::Inequality | CheckKind::Condition => {
                self.margin >= -self.tolerance - self.error_bar
            }
            CheckKind::Measurement => !self.margin.is_nan(),
        };
        self
    }

    pub fn with_breakdown(mut self, breakdown: Vec<(String, f64)>) -> Self {
        self.breakdown = breakdown;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }

    /// Same check judged with `tolerance × factor`.
    pub fn rescaled(mut self, factor: f64) -> Self {
        self.tolerance *= factor;
        self.evaluated()
    }

    pub fn breakdown_value(&self, key: &str) -> Option<f64> {
        self.breakdown.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn fails_gate(&self) -> bool {
        self.gating && !self.pass
    }
}
