//! Exact ordered arithmetic on a computable fragment of the hyperreals.
//!
//! Values are finite series over named infinitesimal generators with
//! rational exponent vectors, truncated by a per-registry policy. The module
//! provides magnitude classification, the standard part, the relaxed order
//! relations (`≈`, `⪆`, `⪅`, `≫`, `≪`) and class-interaction tables.

mod coeff;
mod exponent;
mod precise;
mod registry;
pub mod table;
mod text;
mod value;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use coeff::{parse_decimal, parse_rational, Approx, Coeff, Mode, Rational};
pub use exponent::Exponent;
pub use registry::{GeneratorRegistry, SeriesPolicy};
pub use text::TermJson;
pub use value::Hyperreal;

pub(crate) use exponent::{component_text, parse_component};
pub(crate) use registry::is_variable_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MagnitudeClass {
    Zero,
    Infinitesimal,
    Appreciable,
    Infinite,
}

impl std::fmt::Display for MagnitudeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MagnitudeClass::Zero => "Zero",
            MagnitudeClass::Infinitesimal => "Infinitesimal",
            MagnitudeClass::Appreciable => "Appreciable",
            MagnitudeClass::Infinite => "Infinite",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HyperrealError {
    #[error("exponent {exponent} is outside [-{bound}, {bound}]")]
    ExponentOutOfBounds { exponent: String, bound: i64 },
    #[error("exponent has {got} components but the registry has {expected} generators")]
    ExponentArity { expected: usize, got: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("`{0}` is infinite and has no standard part")]
    NotNearstandard(String),
    #[error("square root of infinite value `{0}`")]
    InfiniteSqrt(String),
    #[error("invalid generator name `{0}`")]
    InvalidGenerator(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid series policy {0}")]
    InvalidPolicy(String),
    #[error("{0}")]
    Parse(String),
}
