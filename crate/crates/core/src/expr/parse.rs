//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' power)?
//! power  := int | '-' int | '(' ['-'] int ['/' int] ')'
//! base   := number | generator | 'x' INT | 'x' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Bare `x` is accepted when the arity is 1. Rational powers are only
//! allowed on generators.

use num_rational::Rational64;
use num_traits::Zero;

use super::ast::{Expr, Func};
use super::ExprError;
use crate::hyperreal::{is_variable_name, parse_decimal, GeneratorRegistry};

/// Parses `text` over the variables `x1..x{arity}` and the registry's
/// generators.
pub fn parse(text: &str, arity: usize, registry: &GeneratorRegistry) -> Result<Expr, ExprError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, arity, registry };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(e)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    arity: usize,
    registry: &'a GeneratorRegistry,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ExprError {
        ExprError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(match self.peek() {
                Some(found) => self.error(format!("expected `{c}`, found `{found}`")),
                None => self.error(format!("expected `{c}`, found end of input")),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = fold(Expr::Add(Box::new(acc), Box::new(self.term()?)));
            } else if self.eat('-') {
                acc = fold(Expr::Sub(Box::new(acc), Box::new(self.term()?)));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = fold(Expr::Mul(Box::new(acc), Box::new(self.unary()?)));
            } else if self.eat('/') {
                acc = fold(Expr::Div(Box::new(acc), Box::new(self.unary()?)));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            Ok(fold(Expr::Neg(Box::new(self.unary()?))))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let at = self.pos;
        let power = self.power()?;
        match base {
            Expr::Gen { name, index, power: p } => {
                let power = p * power;
                if power.is_zero() {
                    Ok(Expr::int(1))
                } else {
                    Ok(Expr::Gen { name, index, power })
                }
            }
            base if power.is_integer() => Ok(fold(Expr::Pow(Box::new(base), *power.numer()))),
            _ => Err(ExprError::Syntax {
                pos: at,
                msg: "only generators take non-integer powers".into(),
            }),
        }
    }

    fn power(&mut self) -> Result<Rational64, ExprError> {
        if self.eat('(') {
            let neg = self.eat('-');
            let num = self.integer()?;
            let den = if self.eat('/') { self.integer()? } else { 1 };
            if den == 0 {
                return Err(self.error("zero denominator in power"));
            }
            self.expect(')')?;
            let r = Rational64::new(num, den);
            Ok(if neg { -r } else { r })
        } else {
            let neg = self.eat('-');
            let k = Rational64::from_integer(self.integer()?);
            Ok(if neg { -k } else { k })
        }
    }

    fn integer(&mut self) -> Result<i64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| ExprError::Syntax { pos: start, msg: format!("integer `{s}` is too large") })
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_alphabetic() || c == '_' {
            return self.identifier();
        }
        Err(self.error(format!("unexpected `{c}`")))
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.chars.len() && p.chars[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            digits(self);
        }
        // an exponent marker only counts when digits follow
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let mut look = self.pos + 1;
            if matches!(self.chars.get(look), Some('+' | '-')) {
                look += 1;
            }
            if self.chars.get(look).is_some_and(|c| c.is_ascii_digit()) {
                self.pos = look;
                digits(self);
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        parse_decimal(&s)
            .map(Expr::Const)
            .ok_or(ExprError::Syntax { pos: start, msg: format!("malformed number `{s}`") })
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        if let Some(func) = Func::from_name(&name) {
            self.expect('(')?;
            let arg = self.expr()?;
            self.expect(')')?;
            return Ok(Expr::Func(func, Box::new(arg)));
        }
        if let Some(index) = self.registry.index_of(&name) {
            return Ok(Expr::Gen { name, index, power: Rational64::from_integer(1) });
        }
        if name == "x" {
            return if self.arity == 1 {
                Ok(Expr::Var(0))
            } else {
                Err(ExprError::UnknownIdentifier { pos: start, name })
            };
        }
        if is_variable_name(&name) {
            let index: usize = name[1..].parse().map_err(|_| ExprError::UnknownIdentifier {
                pos: start,
                name: name.clone(),
            })?;
            if index == 0 || index > self.arity {
                return Err(ExprError::ArityViolation { pos: start, index, arity: self.arity });
            }
            return Ok(Expr::Var(index - 1));
        }
        Err(ExprError::UnknownIdentifier { pos: start, name })
    }
}

/// Folds a node whose operands are all numeric constants.
fn fold(e: Expr) -> Expr {
    match e {
        Expr::Neg(a) if a.as_const().is_some() => Expr::neg(*a),
        Expr::Add(a, b) if a.as_const().is_some() && b.as_const().is_some() => Expr::add(*a, *b),
        Expr::Sub(a, b) if a.as_const().is_some() && b.as_const().is_some() => Expr::sub(*a, *b),
        Expr::Mul(a, b) if a.as_const().is_some() && b.as_const().is_some() => Expr::mul(*a, *b),
        Expr::Div(a, b) if a.as_const().is_some() && b.as_const().is_some_and(|c| !c.is_zero()) => {
            Expr::div(*a, *b)
        }
        Expr::Pow(a, k) if a.as_const().is_some_and(|c| !c.is_zero()) => Expr::pow(*a, k),
        other => other,
    }
}
