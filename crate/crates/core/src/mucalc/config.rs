use std::cmp::Ordering;
use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::ProbeError;
use crate::hyperreal::{component_text, Coeff, GeneratorRegistry, Hyperreal, TermJson};

/// An infinitesimal displacement, stored as raw series terms so the same
/// configuration works in either coefficient mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Offset(pub Vec<TermJson>);

impl Offset {
    pub fn monomial(coef: i64, exps: &[Rational64]) -> Self {
        Offset(vec![term(coef, exps)])
    }

    pub fn to_hyperreal<C: Coeff>(&self, registry: &Arc<GeneratorRegistry>) -> Result<Hyperreal<C>, ProbeError> {
        Hyperreal::from_json_terms(registry, &self.0)
            .map_err(|e| ProbeError::InvalidConfig(format!("offset: {e}")))
    }

    fn negated(&self) -> Self {
        Offset(
            self.0
                .iter()
                .map(|t| TermJson {
                    exps: t.exps.clone(),
                    coef: t.coef.strip_prefix('-').map_or_else(|| format!("-{}", t.coef), str::to_string),
                })
                .collect(),
        )
    }
}

fn term(coef: i64, exps: &[Rational64]) -> TermJson {
    TermJson {
        exps: exps
            .iter()
            .map(component_text)
            .collect(),
        coef: coef.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// The encompassing threshold is `g1^q` for the first generator `g1`.
    #[serde(with = "rational_text")]
    pub delta_exponent: Rational64,
    pub sample_offsets: Vec<Offset>,
    pub max_taylor_order: usize,
}

impl ProbeConfig {
    /// `q = 8`, offsets `±g1, ±2 g1, ±g1^2, ±g1^(1/2)` and, with a second
    /// generator, `±(g1 + g2)`.
    pub fn standard(registry: &GeneratorRegistry) -> Self {
        let n = registry.len();
        let unit = |i: usize, p: Rational64| {
            let mut e = vec![Rational64::from_integer(0); n];
            e[i] = p;
            e
        };
        let int = Rational64::from_integer;
        let mut base = vec![
            Offset::monomial(1, &unit(0, int(1))),
            Offset::monomial(2, &unit(0, int(1))),
            Offset::monomial(1, &unit(0, int(2))),
            Offset::monomial(1, &unit(0, Rational64::new(1, 2))),
        ];
        if n > 1 {
            base.push(Offset(vec![term(1, &unit(0, int(1))), term(1, &unit(1, int(1)))]));
        }
        let sample_offsets = base.iter().flat_map(|o| [o.clone(), o.negated()]).collect();
        ProbeConfig { delta_exponent: int(8), sample_offsets, max_taylor_order: 8 }
    }

    /// `g1^q`.
    pub fn threshold<C: Coeff>(&self, registry: &Arc<GeneratorRegistry>) -> Result<Hyperreal<C>, ProbeError> {
        Hyperreal::generator(registry, 0, self.delta_exponent)
            .map_err(|e| ProbeError::InvalidConfig(format!("threshold: {e}")))
    }

    /// Checks `0 < q < exp_bound` and that every offset is a nonzero
    /// infinitesimal strictly above the threshold; returns the offsets.
    pub fn offsets<C: Coeff>(&self, registry: &Arc<GeneratorRegistry>) -> Result<Vec<Hyperreal<C>>, ProbeError> {
        let bound = Rational64::from_integer(registry.policy().exp_bound);
        if self.delta_exponent <= Rational64::from_integer(0) || self.delta_exponent >= bound {
            return Err(ProbeError::InvalidConfig(format!(
                "delta exponent {} must lie strictly between 0 and {bound}",
                self.delta_exponent
            )));
        }
        if self.sample_offsets.is_empty() {
            return Err(ProbeError::InvalidConfig("no sample offsets".into()));
        }
        let threshold: Hyperreal<C> = self.threshold(registry)?;
        self.sample_offsets
            .iter()
            .map(|o| {
                let h: Hyperreal<C> = o.to_hyperreal(registry)?;
                let lead = h.leading_exponent().cloned();
                match lead {
                    Some(e) if e.sign() == Ordering::Greater => {}
                    _ => {
                        return Err(ProbeError::InvalidConfig(format!("offset {h} is not a nonzero infinitesimal")))
                    }
                }
                if h.abs() <= threshold {
                    return Err(ProbeError::InvalidConfig(format!(
                        "offset {h} does not exceed the threshold {threshold}"
                    )));
                }
                Ok(h)
            })
            .collect()
    }
}

mod rational_text {
    use num_rational::Rational64;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::hyperreal::{component_text, parse_component};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&component_text(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let text = String::deserialize(d)?;
        parse_component(&text).ok_or_else(|| D::Error::custom(format!("bad rational `{text}`")))
    }
}
