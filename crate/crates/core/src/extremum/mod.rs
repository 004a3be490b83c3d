//! Relaxed extremum tests at standard points.
//!
//! A standard `a` is an m-minimizer of `f` when `f(x) ⪆ f(a)` on a
//! neighbourhood of standard radius. The tests here read the verdict off the
//! first derivative at `a` that is not infinitely close to zero, and
//! [`st_oracle_classify`] runs the classical test on the standard part of `f`
//! for comparison.

mod candidates;
mod classify;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::ExprError;
use crate::hyperreal::{Coeff, Hyperreal, HyperrealError, MagnitudeClass, Rational};
use crate::mucalc::ProbeError;

pub use candidates::{find_candidates, Candidate, CandidateJson, CandidateSet, CandidateSetJson, CandidateSource};
pub use classify::{
    classify_1d, gradient_test, necessary_check, st_hessian_oracle, st_oracle_classify, HessianClass,
    DEFAULT_MAX_ORDER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtremumError {
    #[error(transparent)]
    Eval(#[from] ExprError),
    #[error("maximum order must be at least 2, got {0}")]
    OrderTooSmall(usize),
    #[error("{0}")]
    Precondition(String),
}

impl From<HyperrealError> for ExtremumError {
    fn from(e: HyperrealError) -> Self {
        ExtremumError::Eval(e.into())
    }
}

impl From<ProbeError> for ExtremumError {
    fn from(e: ProbeError) -> Self {
        match e {
            ProbeError::Eval(e) => ExtremumError::Eval(e),
            other => ExtremumError::Precondition(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    MMinimizer,
    MMaximizer,
    NeitherOddOrder,
    NecessaryFailed,
    Inconclusive,
}

impl VerdictKind {
    /// The verdict for `-f`.
    pub fn mirrored(self) -> Self {
        match self {
            VerdictKind::MMinimizer => VerdictKind::MMaximizer,
            VerdictKind::MMaximizer => VerdictKind::MMinimizer,
            other => other,
        }
    }

    pub fn is_extremum(self) -> bool {
        matches!(self, VerdictKind::MMinimizer | VerdictKind::MMaximizer)
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One computed derivative: `d^k f / dx_var^k (a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry<C: Coeff = Rational> {
    pub k: usize,
    /// Zero-based variable index; `None` for functions of one variable.
    pub var: Option<usize>,
    pub value: Hyperreal<C>,
    pub class: MagnitudeClass,
}

impl<C: Coeff> TraceEntry<C> {
    pub(crate) fn new(k: usize, var: Option<usize>, value: Hyperreal<C>) -> Self {
        let class = value.magnitude_class();
        TraceEntry { k, var, value, class }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<C: Coeff = Rational> {
    pub kind: VerdictKind,
    pub decisive_order: Option<usize>,
    pub decisive_value: Option<Hyperreal<C>>,
    /// `None` when the decisive value is infinite.
    pub decisive_standard_part: Option<C>,
    pub derivative_trace: Vec<TraceEntry<C>>,
}

impl<C: Coeff> Verdict<C> {
    pub(crate) fn decided(kind: VerdictKind, entry: &TraceEntry<C>, trace: Vec<TraceEntry<C>>) -> Self {
        Verdict {
            kind,
            decisive_order: Some(entry.k),
            decisive_value: Some(entry.value.clone()),
            decisive_standard_part: entry.value.standard_part().ok(),
            derivative_trace: trace,
        }
    }

    pub(crate) fn inconclusive(trace: Vec<TraceEntry<C>>) -> Self {
        Verdict {
            kind: VerdictKind::Inconclusive,
            decisive_order: None,
            decisive_value: None,
            decisive_standard_part: None,
            derivative_trace: trace,
        }
    }

    pub fn to_json(&self) -> VerdictJson {
        VerdictJson {
            kind: self.kind,
            decisive_order: self.decisive_order,
            decisive_value: self.decisive_value.as_ref().map(ToString::to_string),
            standard_part: self.decisive_standard_part.as_ref().map(Coeff::to_text),
            trace: self
                .derivative_trace
                .iter()
                .map(|t| TraceJson {
                    k: t.k,
                    var: t.var.map(|v| v + 1),
                    value: t.value.to_string(),
                    class: t.class,
                })
                .collect(),
        }
    }
}

impl<C: Coeff> fmt::Display for Verdict<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let (Some(k), Some(v)) = (self.decisive_order, &self.decisive_value) {
            write!(f, " (order {k}, value {v}")?;
            if let Some(s) = &self.decisive_standard_part {
                write!(f, ", standard part {}", s.to_text())?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceJson {
    pub k: usize,
    /// One-based variable index, present for partial derivatives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<usize>,
    pub value: String,
    pub class: MagnitudeClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub kind: VerdictKind,
    pub decisive_order: Option<usize>,
    pub decisive_value: Option<String>,
    pub standard_part: Option<String>,
    pub trace: Vec<TraceJson>,
}

#[cfg(test)]
mod tests;
