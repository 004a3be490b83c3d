use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HyperrealError;

/// Truncation policy shared by every value built on a registry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPolicy {
    /// Every exponent component must lie in `[-exp_bound, exp_bound]`.
    pub exp_bound: i64,
    /// Maximum number of stored terms.
    pub max_terms: usize,
    /// Float mode only: coefficients with `|c| <= zero_tol` are dropped.
    pub zero_tol: f64,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy { exp_bound: 16, max_terms: 64, zero_tol: 1e-9 }
    }
}

/// Ordered list of named infinitesimal generators.
///
/// Declaration order fixes the valuation hierarchy: the first generator is
/// the largest infinitesimal, and each later one is smaller than every
/// positive power of the earlier ones.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRegistry {
    names: Vec<String>,
    policy: SeriesPolicy,
}

const RESERVED: &[&str] = &["sin", "cos", "exp", "log", "ln", "x"];

impl GeneratorRegistry {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Arc<Self>, HyperrealError> {
        Self::with_policy(names, SeriesPolicy::default())
    }

    pub fn with_policy<S: AsRef<str>>(
        names: &[S],
        policy: SeriesPolicy,
    ) -> Result<Arc<Self>, HyperrealError> {
        if policy.exp_bound <= 0 || policy.max_terms == 0 || policy.zero_tol.is_nan() || policy.zero_tol < 0.0 {
            return Err(HyperrealError::InvalidPolicy(format!("{policy:?}")));
        }
        let mut out: Vec<String> = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref().trim();
            if !is_identifier(name) {
                return Err(HyperrealError::InvalidGenerator(name.to_string()));
            }
            if RESERVED.contains(&name) || is_variable_name(name) {
                return Err(HyperrealError::InvalidGenerator(name.to_string()));
            }
            if out.iter().any(|n| n == name) {
                return Err(HyperrealError::DuplicateGenerator(name.to_string()));
            }
            out.push(name.to_string());
        }
        Ok(Arc::new(GeneratorRegistry { names: out, policy }))
    }

    /// The default `eps, delta` registry.
    pub fn standard() -> Arc<Self> {
        Self::new(&["eps", "delta"]).expect("default generators are valid")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn policy(&self) -> &SeriesPolicy {
        &self.policy
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `x1`, `x2`, ... are variable names in expressions.
pub(crate) fn is_variable_name(s: &str) -> bool {
    s.len() > 1 && s.starts_with('x') && s[1..].bytes().all(|b| b.is_ascii_digit())
}
