//! Computable hyperreal arithmetic and relaxed optimality tests.
//!
//! [`hyperreal`] implements truncated multi-generator series as a stand-in
//! for the hyperreal line, [`expr`] evaluates and differentiates expressions
//! over it, [`mucalc`] probes continuity, differentiability, mean-value and
//! Taylor identities on sampled witnesses, and [`extremum`] classifies
//! candidate points as m-minimizers or m-maximizers.

pub mod expr;
pub mod extremum;
pub mod hyperreal;
pub mod mucalc;
