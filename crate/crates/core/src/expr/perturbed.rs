use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use super::ast::Expr;
use super::parse::parse;
use super::ExprError;
use crate::hyperreal::{parse_rational, Coeff, GeneratorRegistry, Hyperreal, Rational, TermJson};

/// A point of the domain: one hyperreal per coordinate.
#[derive(Clone, PartialEq, Debug)]
pub struct Point<C: Coeff = Rational> {
    coords: Vec<Hyperreal<C>>,
}

impl<C: Coeff> Point<C> {
    /// Panics if the coordinates use different generator registries.
    pub fn new(coords: Vec<Hyperreal<C>>) -> Self {
        if let Some(first) = coords.first() {
            assert!(
                coords.iter().all(|c| c.registry().names() == first.registry().names()),
                "point coordinates built on different generator registries"
            );
        }
        Point { coords }
    }

    pub fn standard(registry: &Arc<GeneratorRegistry>, coords: &[Rational]) -> Self {
        Point::new(coords.iter().map(|c| Hyperreal::from_rational(registry, c)).collect())
    }

    pub fn from_coeffs(registry: &Arc<GeneratorRegistry>, coords: &[C]) -> Self {
        Point::new(coords.iter().map(|c| Hyperreal::from_coeff(registry, c.clone())).collect())
    }

    pub fn scalar(x: Hyperreal<C>) -> Self {
        Point { coords: vec![x] }
    }

    pub fn coords(&self) -> &[Hyperreal<C>] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Standard coordinates, if every coordinate is standard.
    pub fn as_standard(&self) -> Option<Vec<C>> {
        self.coords.iter().map(Hyperreal::as_standard).collect()
    }

    /// Coordinate-wise standard part.
    pub fn standard_part(&self) -> Result<Vec<C>, ExprError> {
        self.coords.iter().map(|c| c.standard_part().map_err(ExprError::from)).collect()
    }
}

impl<C: Coeff> fmt::Display for Point<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl<C: Coeff> Serialize for Point<C> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.coords.iter().map(ToString::to_string))
    }
}

/// A point where the function value is replaced.
#[derive(Clone, Debug, PartialEq)]
pub struct Override<C: Coeff = Rational> {
    pub point: Vec<Rational>,
    pub value: Hyperreal<C>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverrideJson {
    pub point: Vec<String>,
    pub value: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnJson {
    pub body: String,
    pub arity: usize,
    #[serde(default)]
    pub overrides: Vec<OverrideJson>,
}

/// An expression plus isolated point overrides, each infinitely close to the
/// body's value there.
#[derive(Clone, Debug)]
pub struct PerturbedFn<C: Coeff = Rational> {
    body: Expr,
    arity: usize,
    registry: Arc<GeneratorRegistry>,
    overrides: Vec<Override<C>>,
}

impl<C: Coeff> PerturbedFn<C> {
    pub fn new(body: Expr, arity: usize, registry: &Arc<GeneratorRegistry>) -> Result<Self, ExprError> {
        if let Some(max) = body.max_var() {
            if max >= arity {
                return Err(ExprError::ArityViolation { pos: 0, index: max + 1, arity });
            }
        }
        Ok(PerturbedFn { body, arity, registry: registry.clone(), overrides: Vec::new() })
    }

    pub fn parse(text: &str, arity: usize, registry: &Arc<GeneratorRegistry>) -> Result<Self, ExprError> {
        Self::new(parse(text, arity, registry)?, arity, registry)
    }

    /// Adds an override; `value` must be infinitely close to the body there.
    pub fn with_override(mut self, point: Vec<Rational>, value: Hyperreal<C>) -> Result<Self, ExprError> {
        let p = Point::standard(&self.registry, &point);
        if p.len() != self.arity {
            return Err(ExprError::ArityMismatch { expected: self.arity, got: p.len() });
        }
        if self.overrides.iter().any(|o| o.point == point) {
            return Err(ExprError::DuplicateOverride(p.to_string()));
        }
        let body = self.body.eval(&self.registry, p.coords())?;
        if !value.approx_eq(&body) {
            return Err(ExprError::OverrideNotClose { point: p.to_string(), body: body.to_string() });
        }
        self.overrides.push(Override { point, value });
        Ok(self)
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn registry(&self) -> &Arc<GeneratorRegistry> {
        &self.registry
    }

    pub fn overrides(&self) -> &[Override<C>] {
        &self.overrides
    }

    fn check_arity(&self, p: &Point<C>) -> Result<(), ExprError> {
        if p.len() == self.arity {
            Ok(())
        } else {
            Err(ExprError::ArityMismatch { expected: self.arity, got: p.len() })
        }
    }

    /// The override whose point equals `p` exactly, if any.
    pub fn override_at(&self, p: &Point<C>) -> Option<&Override<C>> {
        let std = p.as_standard()?;
        self.overrides.iter().find(|o| {
            o.point.iter().zip(&std).all(|(r, c)| C::from_rational(r) == *c)
        })
    }

    pub fn evaluate(&self, p: &Point<C>) -> Result<Hyperreal<C>, ExprError> {
        self.check_arity(p)?;
        if let Some(o) = self.override_at(p) {
            return Ok(o.value.clone());
        }
        self.body.eval(&self.registry, p.coords())
    }

    /// `d^k f / d x_var^k` at `a`, from the body alone.
    pub fn nth_derivative_at(&self, var: usize, k: usize, a: &Point<C>) -> Result<Hyperreal<C>, ExprError> {
        self.check_arity(a)?;
        self.body.nth_derivative(var, k).eval(&self.registry, a.coords())
    }

    /// `st(f(a))` at a standard point.
    pub fn st_function_value(&self, a: &[C]) -> Result<C, ExprError> {
        let v = self.evaluate(&Point::from_coeffs(&self.registry, a))?;
        Ok(v.standard_part()?)
    }

    /// `st(d^k f / d x_var^k (a))` at a standard point.
    pub fn st_derivative(&self, var: usize, k: usize, a: &[C]) -> Result<C, ExprError> {
        let v = self.nth_derivative_at(var, k, &Point::from_coeffs(&self.registry, a))?;
        Ok(v.standard_part()?)
    }

    /// `-f`, overrides included.
    pub fn negated(&self) -> Self {
        PerturbedFn {
            body: Expr::neg(self.body.clone()),
            arity: self.arity,
            registry: self.registry.clone(),
            overrides: self
                .overrides
                .iter()
                .map(|o| Override { point: o.point.clone(), value: -&o.value })
                .collect(),
        }
    }

    /// `f ∘ g` for scalar `g`; overrides of either side are not carried over.
    pub fn compose(&self, g: &PerturbedFn<C>) -> Result<Self, ExprError> {
        if self.arity != 1 {
            return Err(ExprError::ArityMismatch { expected: 1, got: self.arity });
        }
        PerturbedFn::new(self.body.substitute(std::slice::from_ref(&g.body)), g.arity, &self.registry)
    }

    pub fn to_json(&self) -> FnJson {
        FnJson {
            body: self.body.to_string(),
            arity: self.arity,
            overrides: self
                .overrides
                .iter()
                .map(|o| OverrideJson {
                    point: o.point.iter().map(rational_text).collect(),
                    value: o.value.to_json_terms(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &FnJson, registry: &Arc<GeneratorRegistry>) -> Result<Self, ExprError> {
        let mut f = Self::parse(&json.body, json.arity, registry)?;
        for o in &json.overrides {
            let point = o
                .point
                .iter()
                .map(|s| parse_rational(s).ok_or_else(|| ExprError::InvalidJson(format!("bad coordinate `{s}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let value = Hyperreal::from_json_terms(registry, &o.value)?;
            f = f.with_override(point, value)?;
        }
        Ok(f)
    }
}

fn rational_text(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
