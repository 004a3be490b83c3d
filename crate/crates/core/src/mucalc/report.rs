use std::fmt;

use serde::{Deserialize, Serialize};

use super::ProbeConfig;
use crate::expr::Point;
use crate::hyperreal::{Coeff, Hyperreal, MagnitudeClass, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    SContinuity,
    Increment,
    Mvt,
    Taylor,
    Chain,
    Necessary,
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeKind::SContinuity => "scontinuity",
            ProbeKind::Increment => "increment",
            ProbeKind::Mvt => "mvt",
            ProbeKind::Taylor => "taylor",
            ProbeKind::Chain => "chain",
            ProbeKind::Necessary => "necessary",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness<C: Coeff = Rational> {
    pub points: Vec<Point<C>>,
    pub residual: Hyperreal<C>,
    pub class: MagnitudeClass,
}

impl<C: Coeff> Witness<C> {
    pub fn new(points: Vec<Point<C>>, residual: Hyperreal<C>) -> Self {
        let class = residual.magnitude_class();
        Witness { points, residual, class }
    }

    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            points: self
                .points
                .iter()
                .map(|p| p.coords().iter().map(ToString::to_string).collect())
                .collect(),
            residual: self.residual.to_string(),
            class: self.class,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport<C: Coeff = Rational> {
    pub probe: ProbeKind,
    pub passed: bool,
    pub config: ProbeConfig,
    pub witnesses: Vec<Witness<C>>,
    pub failure_witness: Option<Witness<C>>,
    pub notes: Vec<String>,
}

impl<C: Coeff> ProbeReport<C> {
    /// Sorts the witnesses canonically and decides `passed` from `accept`.
    pub(crate) fn assemble(
        probe: ProbeKind,
        config: &ProbeConfig,
        witnesses: Vec<Witness<C>>,
        accept: impl Fn(&Witness<C>) -> bool,
        notes: Vec<String>,
    ) -> Self {
        let mut keyed: Vec<(WitnessJson, Witness<C>)> =
            witnesses.into_iter().map(|w| (w.to_json(), w)).collect();
        keyed.sort_by(|a, b| {
            (&a.0.points, &a.0.residual).cmp(&(&b.0.points, &b.0.residual))
        });
        keyed.dedup_by(|a, b| a.0 == b.0);
        let witnesses: Vec<Witness<C>> = keyed.into_iter().map(|(_, w)| w).collect();
        let failure_witness = witnesses.iter().find(|w| !accept(w)).cloned();
        ProbeReport {
            probe,
            passed: failure_witness.is_none(),
            config: config.clone(),
            witnesses,
            failure_witness,
            notes,
        }
    }

    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            probe: self.probe,
            passed: self.passed,
            config: self.config.clone(),
            witnesses: self.witnesses.iter().map(Witness::to_json).collect(),
            failure_witness: self.failure_witness.as_ref().map(Witness::to_json),
            notes: self.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub points: Vec<Vec<String>>,
    pub residual: String,
    pub class: MagnitudeClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub probe: ProbeKind,
    pub passed: bool,
    pub config: ProbeConfig,
    pub witnesses: Vec<WitnessJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_witness: Option<WitnessJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}
