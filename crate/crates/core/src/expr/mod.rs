//! Expressions over the series field.
//!
//! An [`Expr`] is built from rational constants, generator powers, the
//! variables `x1..xn`, field operations, integer powers and `sin`, `cos`,
//! `exp`, `log`. [`PerturbedFn`] pairs a body with finitely many point
//! overrides that differ from the body by an infinitesimal.

mod ast;
mod diff;
mod eval;
mod parse;
mod perturbed;

use thiserror::Error;

use crate::hyperreal::HyperrealError;

pub use ast::{Expr, Func};
pub use eval::lift;
pub use parse::parse;
pub use perturbed::{FnJson, Override, OverrideJson, PerturbedFn, Point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("variable x{index} at position {pos} exceeds arity {arity}")]
    ArityViolation { pos: usize, index: usize, arity: usize },
    #[error("expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("{func} of infinite argument `{value}`")]
    InfiniteArgument { func: Func, value: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of `{0}`, whose standard part is not positive")]
    LogNonPositive(String),
    #[error("`{0}` is infinite and has no standard part")]
    NotNearstandard(String),
    #[error("override at {point} is not infinitely close to the body value {body}")]
    OverrideNotClose { point: String, body: String },
    #[error("duplicate override at {0}")]
    DuplicateOverride(String),
    #[error("invalid function description: {0}")]
    InvalidJson(String),
    #[error(transparent)]
    Hyperreal(HyperrealError),
}

impl From<HyperrealError> for ExprError {
    fn from(e: HyperrealError) -> Self {
        match e {
            HyperrealError::DivisionByZero => ExprError::DivisionByZero,
            HyperrealError::NotNearstandard(s) => ExprError::NotNearstandard(s),
            other => ExprError::Hyperreal(other),
        }
    }
}
