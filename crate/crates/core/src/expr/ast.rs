use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::hyperreal::{component_text, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub(crate) fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" | "ln" => Some(Func::Log),
            _ => None,
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expression tree. Variables are zero-based (`Var(0)` is `x1`).
///
/// The lowercase constructors (`Expr::add`, `Expr::mul`, ...) fold constants
/// and drop neutral elements; the parser keeps the tree as written apart from
/// folding purely numeric subterms.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Rational),
    Gen { name: String, index: usize, power: Rational64 },
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(r: Rational) -> Expr {
        Expr::Const(r)
    }

    pub fn int(i: i64) -> Expr {
        Expr::Const(Rational::from_integer(i.into()))
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (a, Expr::Neg(b)) => Expr::sub(a, *b),
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => Expr::neg(b),
            (a, Expr::Neg(b)) => Expr::add(a, *b),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    /// Product with the constant factors of both sides pulled to the front.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        let (ca, ra) = a.split_const();
        let (cb, rb) = b.split_const();
        let c = ca * cb;
        if c.is_zero() {
            return Expr::Const(c);
        }
        let rest = match (ra, rb) {
            (None, None) => return Expr::Const(c),
            (Some(r), None) | (None, Some(r)) => r,
            (Some(x), Some(y)) => Expr::Mul(Box::new(x), Box::new(y)),
        };
        if c.is_one() {
            rest
        } else if (-c.clone()).is_one() {
            Expr::Neg(Box::new(rest))
        } else {
            Expr::Mul(Box::new(Expr::Const(c)), Box::new(rest))
        }
    }

    /// `(constant factor, remaining factor)`.
    fn split_const(self) -> (Rational, Option<Expr>) {
        match self {
            Expr::Const(c) => (c, None),
            Expr::Neg(inner) => {
                let (c, r) = inner.split_const();
                (-c, r)
            }
            Expr::Mul(x, y) if x.as_const().is_some() => {
                let (c, r) = y.split_const();
                (x.as_const().unwrap() * c, r)
            }
            other => (Rational::one(), Some(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if !y.is_zero() => Expr::Const(x / y),
            (a, Expr::Const(y)) if !y.is_zero() => Expr::mul(Expr::Const(y.recip()), a),
            (a, _) if a.is_zero() => Expr::int(0),
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(base: Expr, k: i64) -> Expr {
        match (base, k) {
            (_, 0) => Expr::int(1),
            (b, 1) => b,
            (Expr::Const(c), k) if k > 0 || !c.is_zero() => {
                Expr::Const(num_traits::pow::Pow::pow(c, k as i32))
            }
            (Expr::Gen { name, index, power }, k) => {
                Expr::Gen { name, index, power: power * Rational64::from_integer(k) }
            }
            (Expr::Pow(b, j), k) => Expr::pow(*b, j * k),
            (b, k) => Expr::Pow(Box::new(b), k),
        }
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::Func(f, Box::new(arg))
    }

    /// Largest zero-based variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) | Expr::Gen { .. } => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    /// Replaces every `Var(i)` by `subs[i]`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        match self {
            Expr::Const(_) | Expr::Gen { .. } => self.clone(),
            Expr::Var(i) => subs[*i].clone(),
            Expr::Neg(a) => Expr::neg(a.substitute(subs)),
            Expr::Add(a, b) => Expr::add(a.substitute(subs), b.substitute(subs)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(subs), b.substitute(subs)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(subs), b.substitute(subs)),
            Expr::Div(a, b) => Expr::Div(Box::new(a.substitute(subs)), Box::new(b.substitute(subs))),
            Expr::Pow(a, k) => Expr::pow(a.substitute(subs), *k),
            Expr::Func(f, a) => Expr::func(*f, a.substitute(subs)),
        }
    }

    /// The body with every generator set to zero, or `None` when a
    /// generator appears with a non-positive power.
    pub fn without_generators(&self) -> Option<Expr> {
        Some(match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Gen { power, .. } => {
                if power.is_positive() {
                    Expr::int(0)
                } else {
                    return None;
                }
            }
            Expr::Neg(a) => Expr::neg(a.without_generators()?),
            Expr::Add(a, b) => Expr::add(a.without_generators()?, b.without_generators()?),
            Expr::Sub(a, b) => Expr::sub(a.without_generators()?, b.without_generators()?),
            Expr::Mul(a, b) => Expr::mul(a.without_generators()?, b.without_generators()?),
            Expr::Div(a, b) => Expr::Div(
                Box::new(a.without_generators()?),
                Box::new(b.without_generators()?),
            ),
            Expr::Pow(a, k) => Expr::pow(a.without_generators()?, *k),
            Expr::Func(f, a) => Expr::func(*f, a.without_generators()?),
        })
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Gen { .. } | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() && !c.is_negative() {
        write!(f, "{}", c.numer())
    } else if c.is_integer() {
        write!(f, "({})", c.numer())
    } else {
        write!(f, "({}/{})", c.numer(), c.denom())
    }
}

/// Fully parenthesized; the output parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, c),
            Expr::Gen { name, power, .. } => {
                if power.is_one() {
                    f.write_str(name)
                } else if power.is_integer() && power.is_positive() {
                    write!(f, "{name}^{}", power.numer())
                } else {
                    write!(f, "{name}^({})", component_text(power))
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => {
                match a.as_ref() {
                    Expr::Var(_) | Expr::Func(..) => write!(f, "{a}")?,
                    Expr::Const(c) if c.is_integer() && !c.is_negative() => write!(f, "{a}")?,
                    _ => write!(f, "({a})")?,
                }
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Expr::Func(func, a) => {
                // arguments are printed without an extra pair of parentheses
                let inner = a.to_string();
                let inner = match a.as_ref() {
                    Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) | Expr::Div(..) | Expr::Neg(_) => {
                        inner[1..inner.len() - 1].to_string()
                    }
                    _ => inner,
                };
                write!(f, "{func}({inner})")
            }
        }
    }
}
