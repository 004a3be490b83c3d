//! Canonical string and JSON forms of [`Hyperreal`].
//!
//! The canonical string lists terms in increasing exponent order, e.g.
//! `-1 + 2*eps + 3*eps^(1/2)*delta^2`. The JSON form is a list of
//! `{"exps": [..], "coef": ".."}` objects with one exponent string per
//! generator.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::coeff::Coeff;
use super::exponent::{component_text, parse_component, Exponent};
use super::registry::GeneratorRegistry;
use super::value::Hyperreal;
use super::HyperrealError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<String>,
    pub coef: String,
}

/// `eps^(1/2)*delta^2`; empty for the zero exponent.
pub(crate) fn monomial_text(names: &[String], e: &Exponent) -> String {
    let mut parts = Vec::new();
    for (name, c) in names.iter().zip(e.components()) {
        if c.is_zero() {
            continue;
        }
        if c.is_one() {
            parts.push(name.clone());
        } else if c.is_integer() && c.is_positive() {
            parts.push(format!("{name}^{}", c.numer()));
        } else {
            parts.push(format!("{name}^({})", component_text(c)));
        }
    }
    parts.join("*")
}

impl<C: Coeff> fmt::Display for Hyperreal<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let names = self.registry().names();
        for (i, (e, c)) in self.terms().iter().enumerate() {
            let negative = c.sign() == Ordering::Less;
            if i == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            let magnitude = c.abs_value();
            let mono = monomial_text(names, e);
            if mono.is_empty() {
                f.write_str(&magnitude.to_text())?;
            } else if magnitude == C::one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{}*{}", magnitude.to_text(), mono)?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Hyperreal<C> {
    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.terms()
            .iter()
            .map(|(e, c)| TermJson {
                exps: e.components().iter().map(component_text).collect(),
                coef: c.to_text(),
            })
            .collect()
    }

    pub fn from_json_terms(
        registry: &Arc<GeneratorRegistry>,
        terms: &[TermJson],
    ) -> Result<Self, HyperrealError> {
        let mut raw = Vec::with_capacity(terms.len());
        for t in terms {
            let comps = t
                .exps
                .iter()
                .map(|s| {
                    parse_component(s)
                        .ok_or_else(|| HyperrealError::Parse(format!("bad exponent `{s}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let coef = C::parse_text(&t.coef)
                .ok_or_else(|| HyperrealError::Parse(format!("bad coefficient `{}`", t.coef)))?;
            raw.push((Exponent::new(comps), coef));
        }
        Self::make(registry, raw)
    }
}

impl<C: Coeff> Serialize for Hyperreal<C> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json_terms().serialize(serializer)
    }
}
