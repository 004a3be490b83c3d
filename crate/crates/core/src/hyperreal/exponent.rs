use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

use num_rational::Rational64;
use num_traits::{Signed, Zero};

/// Exponent vector of a monomial `g_1^e_1 * ... * g_n^e_n`.
///
/// Exponents are ordered by valuation: a larger exponent means a smaller
/// (more infinitesimal) monomial. Components are compared from the last
/// generator to the first, so every positive power of a later generator is
/// infinitesimal relative to every power of an earlier one; in particular the
/// first generator is the dominant (largest) infinitesimal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<Rational64>);

impl Exponent {
    pub fn zero(len: usize) -> Self {
        Exponent(vec![Rational64::zero(); len])
    }

    pub fn new(components: Vec<Rational64>) -> Self {
        Exponent(components)
    }

    /// Exponent of a single generator raised to `power`.
    pub fn unit(len: usize, index: usize, power: Rational64) -> Self {
        let mut e = Self::zero(len);
        e.0[index] = power;
        e
    }

    pub fn from_ints(components: &[i64]) -> Self {
        Exponent(components.iter().map(|&c| Rational64::from_integer(c)).collect())
    }

    pub fn components(&self) -> &[Rational64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Sign of the valuation: `Greater` for infinitesimal monomials,
    /// `Less` for infinite ones.
    pub fn sign(&self) -> Ordering {
        for c in self.0.iter().rev() {
            if c.is_positive() {
                return Ordering::Greater;
            }
            if c.is_negative() {
                return Ordering::Less;
            }
        }
        Ordering::Equal
    }

    pub fn scale(&self, k: Rational64) -> Self {
        Exponent(self.0.iter().map(|c| c * k).collect())
    }

    pub fn within(&self, bound: i64) -> bool {
        let b = Rational64::from_integer(bound);
        self.0.iter().all(|c| c.abs() <= b)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.0.len(), other.0.len());
        for (a, b) in self.0.iter().rev().zip(other.0.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Exponent {
    type Output = Exponent;

    fn add(self, rhs: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Neg for &Exponent {
    type Output = Exponent;

    fn neg(self) -> Exponent {
        Exponent(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Formats a rational exponent component as `p` or `p/q`.
pub(crate) fn component_text(c: &Rational64) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn parse_component(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            Some(Rational64::new(p.trim().parse().ok()?, q))
        }
        None => s.parse().ok().map(Rational64::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_generators_dominate_the_order() {
        let eps = Exponent::from_ints(&[1, 0]);
        let delta = Exponent::from_ints(&[0, 1]);
        let eps8 = Exponent::from_ints(&[8, 0]);
        // delta is smaller than every positive power of eps
        assert!(delta > eps8);
        assert!(delta > eps);
        // eps^-1 * delta is still infinitesimal
        assert_eq!(Exponent::from_ints(&[-1, 1]).sign(), Ordering::Greater);
        assert_eq!(Exponent::from_ints(&[3, -1]).sign(), Ordering::Less);
    }

    #[test]
    fn bounds_are_componentwise() {
        assert!(Exponent::from_ints(&[16, -16]).within(16));
        assert!(!Exponent::from_ints(&[17, 0]).within(16));
    }
}
