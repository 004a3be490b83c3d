//! Coefficient fields for series terms.
//!
//! Two coefficient types are supported: exact arbitrary-precision rationals
//! ([`Rational`]) and binary64 floats. All series code is generic over the
//! [`Coeff`] trait, so the CLI can pick the mode at run time.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::precise;

/// Exact rational coefficient.
pub type Rational = BigRational;

/// Which coefficient field a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Rational => f.write_str("rational"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode `{other}` (expected rational|float)")),
        }
    }
}

/// A value together with a flag telling whether it is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Approx<C> {
    pub value: C,
    pub exact: bool,
}

impl<C> Approx<C> {
    fn exact(value: C) -> Self {
        Approx { value, exact: true }
    }

    fn inexact(value: C) -> Self {
        Approx { value, exact: false }
    }
}

/// Arithmetic needed from a series coefficient.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_int(i: i64) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// `other` must be nonzero.
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    fn is_exact_zero(&self) -> bool;
    /// Whether the coefficient is dropped during normalization.
    fn is_negligible(&self, zero_tol: f64) -> bool;
    fn sign(&self) -> Ordering;
    fn approx_f64(&self) -> f64;
    /// Exact rational value, if the coefficient is finite.
    fn to_rational(&self) -> Option<Rational>;

    /// Square root of a nonnegative coefficient.
    fn sqrt(&self) -> Approx<Self>;
    fn sin(&self) -> Approx<Self>;
    fn cos(&self) -> Approx<Self>;
    fn exp(&self) -> Approx<Self>;
    /// Natural logarithm of a positive coefficient.
    fn ln(&self) -> Approx<Self>;

    /// Canonical text: `p/q` in lowest terms for rationals, shortest
    /// round-trip decimal for floats.
    fn to_text(&self) -> String;
    fn parse_text(s: &str) -> Option<Self>;

    /// `out[k] = sum of a[i] * b[j]` over the triples `(i, j, k)`.
    fn sum_of_products(a: &[&Self], b: &[&Self], triples: &[(usize, usize, usize)], out: usize) -> Vec<Self> {
        let mut acc = vec![Self::zero(); out];
        for &(i, j, k) in triples {
            acc[k] = acc[k].add(&a[i].mul(b[j]));
        }
        acc
    }

    fn abs_value(&self) -> Self {
        if self.sign() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }
}

impl Coeff for Rational {
    const MODE: Mode = Mode::Rational;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_int(i: i64) -> Self {
        Rational::from_integer(BigInt::from(i))
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn neg(&self) -> Self {
        -self
    }

    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    // Integer products over a common denominator, reduced once per output.
    fn sum_of_products(a: &[&Self], b: &[&Self], triples: &[(usize, usize, usize)], out: usize) -> Vec<Self> {
        fn scaled(xs: &[&Rational]) -> (Vec<BigInt>, BigInt) {
            let d = xs.iter().fold(BigInt::one(), |d, x| d.lcm(x.denom()));
            (xs.iter().map(|x| x.numer() * (&d / x.denom())).collect(), d)
        }
        let (na, da) = scaled(a);
        let (nb, db) = scaled(b);
        let mut acc = vec![BigInt::zero(); out];
        for &(i, j, k) in triples {
            acc[k] += &na[i] * &nb[j];
        }
        let d = da * db;
        acc.into_iter().map(|n| Rational::new(n, d.clone())).collect()
    }

    fn is_negligible(&self, _zero_tol: f64) -> bool {
        Zero::is_zero(self)
    }

    fn sign(&self) -> Ordering {
        if self.is_negative() {
            Ordering::Less
        } else if Zero::is_zero(self) {
            Ordering::Equal
        } else {
            Ordering::Greater
        }
    }

    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn sqrt(&self) -> Approx<Self> {
        let n = self.numer();
        let d = self.denom();
        let (rn, rd) = (n.sqrt(), d.sqrt());
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            return Approx::exact(Rational::new(rn, rd));
        }
        Approx::inexact(precise::eval(precise::Kind::Sqrt, self))
    }

    fn sin(&self) -> Approx<Self> {
        if Zero::is_zero(self) {
            return Approx::exact(<Self as Coeff>::zero());
        }
        Approx::inexact(precise::eval(precise::Kind::Sin, self))
    }

    fn cos(&self) -> Approx<Self> {
        if Zero::is_zero(self) {
            return Approx::exact(<Self as Coeff>::one());
        }
        Approx::inexact(precise::eval(precise::Kind::Cos, self))
    }

    fn exp(&self) -> Approx<Self> {
        if Zero::is_zero(self) {
            return Approx::exact(<Self as Coeff>::one());
        }
        Approx::inexact(precise::eval(precise::Kind::Exp, self))
    }

    fn ln(&self) -> Approx<Self> {
        if One::is_one(self) {
            return Approx::exact(<Self as Coeff>::zero());
        }
        Approx::inexact(precise::eval(precise::Kind::Ln, self))
    }

    fn to_text(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn parse_text(s: &str) -> Option<Self> {
        parse_rational(s)
    }
}

impl Coeff for f64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_int(i: i64) -> Self {
        i as f64
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn neg(&self) -> Self {
        -self
    }

    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }

    fn is_negligible(&self, zero_tol: f64) -> bool {
        f64::abs(*self) <= zero_tol
    }

    fn sign(&self) -> Ordering {
        self.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }

    fn approx_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn sqrt(&self) -> Approx<Self> {
        let r = f64::sqrt(*self);
        Approx { value: r, exact: r * r == *self }
    }

    fn sin(&self) -> Approx<Self> {
        Approx { value: f64::sin(*self), exact: *self == 0.0 }
    }

    fn cos(&self) -> Approx<Self> {
        Approx { value: f64::cos(*self), exact: *self == 0.0 }
    }

    fn exp(&self) -> Approx<Self> {
        Approx { value: f64::exp(*self), exact: *self == 0.0 }
    }

    fn ln(&self) -> Approx<Self> {
        Approx { value: f64::ln(*self), exact: *self == 1.0 }
    }

    fn to_text(&self) -> String {
        format!("{self}")
    }

    fn parse_text(s: &str) -> Option<Self> {
        if let Ok(v) = s.trim().parse::<f64>() {
            return Some(v);
        }
        parse_rational(s).map(|r| ToPrimitive::to_f64(&r).unwrap_or(f64::NAN))
    }
}

/// Parses `p/q`, an integer, or a decimal literal (optionally with an
/// exponent, e.g. `2.5e-3`) into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_decimal(p)?;
        let q = parse_decimal(q)?;
        if Zero::is_zero(&q) {
            return None;
        }
        return Some(p / q);
    }
    parse_decimal(s)
}

/// Exact value of a decimal literal such as `-12.5e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exp - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Some(if neg { -value } else { value })
}
