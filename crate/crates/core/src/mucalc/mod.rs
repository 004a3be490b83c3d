//! Witness-based probes of continuity, differentiability, mean-value and
//! Taylor identities.
//!
//! Every probe samples points in the monad of a base point using the offsets
//! of a [`ProbeConfig`], computes a residual for each sample and passes when
//! every residual has the magnitude class the identity demands. A pass is
//! evidence; a failure comes with a witness.

mod config;
mod probes;
mod report;

use thiserror::Error;

use crate::expr::ExprError;
use crate::hyperreal::{HyperrealError, MagnitudeClass};

pub use config::{Offset, ProbeConfig};
pub use probes::{chain_rule_check, mu_increment_check, mvt_check, s_continuity_probe, taylor_check};
pub use report::{ProbeKind, ProbeReport, ReportJson, Witness, WitnessJson};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error(transparent)]
    Eval(#[from] ExprError),
    #[error("invalid probe configuration: {0}")]
    InvalidConfig(String),
    #[error("chain rule does not apply: g'(a) = {value} is {class}, not Appreciable")]
    InapplicableChainRule { value: String, class: MagnitudeClass },
    #[error("{0}")]
    Precondition(String),
}

impl From<HyperrealError> for ProbeError {
    fn from(e: HyperrealError) -> Self {
        ProbeError::Eval(e.into())
    }
}
