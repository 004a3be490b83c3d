use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::Rational64;

use super::coeff::{Coeff, Rational};
use super::exponent::Exponent;
use super::registry::GeneratorRegistry;
use super::{HyperrealError, MagnitudeClass};

/// Upper bound on Neumann / binomial series iterations. Every series used
/// here runs out of representable exponents long before this.
const MAX_SERIES_STEPS: usize = 4096;

/// A truncated series `sum c_i * g^e_i` over the generators of a registry.
///
/// Terms are kept sorted by increasing [`Exponent`], so the first term is the
/// leading (largest-magnitude) one. `truncated` records whether any term was
/// ever discarded on the way to this value.
#[derive(Clone)]
pub struct Hyperreal<C: Coeff = Rational> {
    registry: Arc<GeneratorRegistry>,
    terms: Vec<(Exponent, C)>,
    truncated: bool,
}

impl<C: Coeff> Hyperreal<C> {
    pub fn zero(registry: &Arc<GeneratorRegistry>) -> Self {
        Hyperreal { registry: registry.clone(), terms: Vec::new(), truncated: false }
    }

    pub fn one(registry: &Arc<GeneratorRegistry>) -> Self {
        Self::from_coeff(registry, C::one())
    }

    /// Embeds a standard coefficient.
    pub fn from_coeff(registry: &Arc<GeneratorRegistry>, c: C) -> Self {
        let mut map = BTreeMap::new();
        map.insert(Exponent::zero(registry.len()), c);
        Self::normalize(registry, map, false)
    }

    pub fn from_rational(registry: &Arc<GeneratorRegistry>, r: &Rational) -> Self {
        Self::from_coeff(registry, C::from_rational(r))
    }

    pub fn from_int(registry: &Arc<GeneratorRegistry>, i: i64) -> Self {
        Self::from_coeff(registry, C::from_int(i))
    }

    /// The generator with the given index, raised to `power`.
    pub fn generator(
        registry: &Arc<GeneratorRegistry>,
        index: usize,
        power: Rational64,
    ) -> Result<Self, HyperrealError> {
        if index >= registry.len() {
            return Err(HyperrealError::UnknownGenerator(format!("#{index}")));
        }
        Self::monomial(registry, Exponent::unit(registry.len(), index, power), C::one())
    }

    pub fn generator_named(
        registry: &Arc<GeneratorRegistry>,
        name: &str,
    ) -> Result<Self, HyperrealError> {
        let index = registry
            .index_of(name)
            .ok_or_else(|| HyperrealError::UnknownGenerator(name.to_string()))?;
        Self::generator(registry, index, Rational64::from_integer(1))
    }

    pub fn monomial(
        registry: &Arc<GeneratorRegistry>,
        exponent: Exponent,
        c: C,
    ) -> Result<Self, HyperrealError> {
        Self::make(registry, vec![(exponent, c)])
    }

    /// Builds a normalized value from raw terms.
    ///
    /// Every exponent must have one component per generator, each within the
    /// registry's bound. Repeated exponents are summed and zero coefficients
    /// dropped; if more than `max_terms` survive, the most infinitesimal ones
    /// are discarded and the result is flagged as truncated.
    pub fn make(
        registry: &Arc<GeneratorRegistry>,
        terms: Vec<(Exponent, C)>,
    ) -> Result<Self, HyperrealError> {
        let bound = registry.policy().exp_bound;
        let mut map: BTreeMap<Exponent, C> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != registry.len() {
                return Err(HyperrealError::ExponentArity { expected: registry.len(), got: e.len() });
            }
            if !e.within(bound) {
                return Err(HyperrealError::ExponentOutOfBounds { exponent: e.to_string(), bound });
            }
            accumulate(&mut map, e, c);
        }
        Ok(Self::normalize(registry, map, false))
    }

    fn normalize(
        registry: &Arc<GeneratorRegistry>,
        map: BTreeMap<Exponent, C>,
        mut truncated: bool,
    ) -> Self {
        let policy = registry.policy();
        let mut terms = Vec::with_capacity(map.len().min(policy.max_terms));
        for (e, c) in map {
            if c.is_negligible(policy.zero_tol) {
                truncated |= !c.is_exact_zero();
                continue;
            }
            if !e.within(policy.exp_bound) {
                truncated = true;
                continue;
            }
            if terms.len() == policy.max_terms {
                truncated = true;
                break;
            }
            terms.push((e, c));
        }
        Hyperreal { registry: registry.clone(), terms, truncated }
    }

    pub fn registry(&self) -> &Arc<GeneratorRegistry> {
        &self.registry
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> &[(Exponent, C)] {
        &self.terms
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub(crate) fn mark_truncated(mut self, flag: bool) -> Self {
        self.truncated |= flag;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&(Exponent, C)> {
        self.terms.first()
    }

    pub fn leading_exponent(&self) -> Option<&Exponent> {
        self.terms.first().map(|(e, _)| e)
    }

    /// Whether the value is a standard real (no generator terms).
    pub fn is_standard(&self) -> bool {
        self.terms.iter().all(|(e, _)| e.is_zero())
    }

    /// The standard value, if this is a standard real.
    pub fn as_standard(&self) -> Option<C> {
        match self.terms.as_slice() {
            [] => Some(C::zero()),
            [(e, c)] if e.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn magnitude_class(&self) -> MagnitudeClass {
        match self.leading_exponent() {
            None => MagnitudeClass::Zero,
            Some(e) => match e.sign() {
                Ordering::Greater => MagnitudeClass::Infinitesimal,
                Ordering::Equal => MagnitudeClass::Appreciable,
                Ordering::Less => MagnitudeClass::Infinite,
            },
        }
    }

    pub fn is_finite(&self) -> bool {
        self.magnitude_class() != MagnitudeClass::Infinite
    }

    /// Coefficient at the zero exponent; errors on infinite values.
    pub fn standard_part(&self) -> Result<C, HyperrealError> {
        if !self.is_finite() {
            return Err(HyperrealError::NotNearstandard(self.to_string()));
        }
        Ok(self
            .terms
            .iter()
            .find(|(e, _)| e.is_zero())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(C::zero))
    }

    /// Sign in the field order: the sign of the leading coefficient.
    pub fn signum(&self) -> Ordering {
        self.terms.first().map_or(Ordering::Equal, |(_, c)| c.sign())
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, k: &C) -> Self {
        let map = self.terms.iter().map(|(e, c)| (e.clone(), c.mul(k))).collect();
        Self::normalize(&self.registry, map, self.truncated)
    }

    fn check_registry(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.registry, &other.registry) || self.registry == other.registry,
            "hyperreal operands built on different generator registries"
        );
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        self.check_registry(other);
        let mut map: BTreeMap<Exponent, C> =
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        for (e, c) in &other.terms {
            let c = if negate { c.neg() } else { c.clone() };
            accumulate(&mut map, e.clone(), c);
        }
        Self::normalize(&self.registry, map, self.truncated || other.truncated)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.check_registry(other);
        let bound = self.registry.policy().exp_bound;
        let mut truncated = self.truncated || other.truncated;
        let mut slots: BTreeMap<Exponent, usize> = BTreeMap::new();
        let mut triples = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (i, (ea, _)) in self.terms.iter().enumerate() {
            for (j, (eb, _)) in other.terms.iter().enumerate() {
                let e = ea + eb;
                if !e.within(bound) {
                    truncated = true;
                    continue;
                }
                let next = slots.len();
                let k = *slots.entry(e).or_insert(next);
                triples.push((i, j, k));
            }
        }
        let a: Vec<&C> = self.terms.iter().map(|(_, c)| c).collect();
        let b: Vec<&C> = other.terms.iter().map(|(_, c)| c).collect();
        let mut sums: Vec<Option<C>> =
            C::sum_of_products(&a, &b, &triples, slots.len()).into_iter().map(Some).collect();
        let map = slots.into_iter().map(|(e, k)| (e, sums[k].take().expect("one slot per exponent"))).collect();
        Self::normalize(&self.registry, map, truncated)
    }

    /// Splits a nonzero value as `c * g^e * (1 + u)` where every term of `u`
    /// is infinitesimal. Returns `(e, c, u)`.
    fn factor_leading(&self) -> (Exponent, C, Self) {
        let (e, c) = self.terms[0].clone();
        let map = self.terms[1..]
            .iter()
            .map(|(ei, ci)| (ei + &(-&e), ci.div(&c)))
            .collect();
        // the shifted exponents are differences of in-bound exponents, so
        // they can leave the box; normalize drops (and flags) those
        let u = Self::normalize(&self.registry, map, false);
        (e, c, u)
    }

    /// `sum_k coeffs(k) * u^k`, stopping once the powers of `u` vanish under
    /// truncation. The result is flagged when the series was cut short.
    fn power_series(&self, u: &Self, coeff: impl Fn(usize, &C) -> C) -> Self {
        let mut sum = Self::one(&self.registry);
        if u.is_zero() {
            return sum.mark_truncated(u.truncated);
        }
        let mut power = Self::one(&self.registry);
        let mut prev = C::one();
        let mut steps = 0;
        loop {
            steps += 1;
            power = &power * u;
            if power.is_zero() {
                break;
            }
            if steps >= MAX_SERIES_STEPS {
                sum.truncated = true;
                break;
            }
            prev = coeff(steps, &prev);
            sum = &sum + &power.scale(&prev);
        }
        // u != 0, so the infinite series was necessarily cut
        sum.mark_truncated(true)
    }

    /// Field division: leading-monomial inversion followed by a truncated
    /// geometric series.
    pub fn checked_div(&self, other: &Self) -> Result<Self, HyperrealError> {
        self.check_registry(other);
        if other.is_zero() {
            return Err(HyperrealError::DivisionByZero);
        }
        let (e, c, u) = other.factor_leading();
        let inv_lead = Self::normalize(
            &self.registry,
            BTreeMap::from([(-&e, C::one().div(&c))]),
            false,
        );
        // 1/(1+u) = sum (-1)^k u^k
        let geometric = self.power_series(&u, |_, prev| prev.neg());
        Ok(&(self * &inv_lead) * &geometric.mark_truncated(other.truncated))
    }

    /// Multiplicative inverse.
    pub fn recip(&self) -> Result<Self, HyperrealError> {
        Self::one(&self.registry).checked_div(self)
    }

    /// Integer power; negative exponents divide.
    pub fn powi(&self, k: i64) -> Result<Self, HyperrealError> {
        if k < 0 {
            return self.powi(-k)?.recip();
        }
        let mut base = self.clone();
        let mut acc = Self::one(&self.registry);
        let mut n = k as u64;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Nonnegative square root of `|x|` for finite `x`.
    ///
    /// The leading exponent of the result is half that of `x`; the tail comes
    /// from the binomial series of `sqrt(1 + u)`.
    pub fn sqrt_abs(&self) -> Result<Self, HyperrealError> {
        if !self.is_finite() {
            return Err(HyperrealError::InfiniteSqrt(self.to_string()));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let (e, c, u) = self.abs().factor_leading();
        let root = c.sqrt();
        let half = e.scale(Rational64::new(1, 2));
        let lead = Self::normalize(&self.registry, BTreeMap::from([(half, root.value)]), !root.exact);
        // binom(1/2, k) = binom(1/2, k-1) * (1/2 - (k-1)) / k
        let series = self.power_series(&u, |k, prev| {
            let k = k as i64;
            prev.mul(&C::from_int(3 - 2 * k)).div(&C::from_int(2 * k))
        });
        Ok((&lead * &series).mark_truncated(self.truncated))
    }

    /// `x ≈ y`: the difference is zero or infinitesimal.
    pub fn approx_eq(&self, other: &Self) -> bool {
        matches!(
            (self - other).magnitude_class(),
            MagnitudeClass::Zero | MagnitudeClass::Infinitesimal
        )
    }

    /// `x ⪆ y`: `x >= y` or `x ≈ y`.
    pub fn maior(&self, other: &Self) -> bool {
        self >= other || self.approx_eq(other)
    }

    /// `x ⪅ y`: `x <= y` or `x ≈ y`.
    pub fn menor(&self, other: &Self) -> bool {
        self <= other || self.approx_eq(other)
    }

    /// `x ≫ y`: `x > y` and not `x ≈ y`.
    pub fn gg(&self, other: &Self) -> bool {
        self > other && !self.approx_eq(other)
    }

    /// `x ≪ y`: `x < y` and not `x ≈ y`.
    pub fn ll(&self, other: &Self) -> bool {
        self < other && !self.approx_eq(other)
    }

    /// Total field order.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

fn accumulate<C: Coeff>(map: &mut BTreeMap<Exponent, C>, e: Exponent, c: C) {
    match map.get_mut(&e) {
        Some(existing) => *existing = existing.add(&c),
        None => {
            map.insert(e, c);
        }
    }
}

impl<C: Coeff> PartialEq for Hyperreal<C> {
    fn eq(&self, other: &Self) -> bool {
        self.registry.names() == other.registry.names() && self.terms == other.terms
    }
}

impl<C: Coeff> PartialOrd for Hyperreal<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl<C: Coeff> fmt::Debug for Hyperreal<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hyperreal({self}")?;
        if self.truncated {
            write!(f, " [truncated]")?;
        }
        write!(f, ")")
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<C: Coeff> $trait<&Hyperreal<C>> for &Hyperreal<C> {
            type Output = Hyperreal<C>;
            fn $method(self, rhs: &Hyperreal<C>) -> Hyperreal<C> {
                let f: fn(&Hyperreal<C>, &Hyperreal<C>) -> Hyperreal<C> = $body;
                f(self, rhs)
            }
        }

        impl<C: Coeff> $trait<Hyperreal<C>> for Hyperreal<C> {
            type Output = Hyperreal<C>;
            fn $method(self, rhs: Hyperreal<C>) -> Hyperreal<C> {
                (&self).$method(&rhs)
            }
        }

        impl<C: Coeff> $trait<&Hyperreal<C>> for Hyperreal<C> {
            type Output = Hyperreal<C>;
            fn $method(self, rhs: &Hyperreal<C>) -> Hyperreal<C> {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_impl(b, false));
forward_binop!(Sub, sub, |a, b| a.add_impl(b, true));
forward_binop!(Mul, mul, |a, b| a.mul_impl(b));

impl<C: Coeff> Neg for &Hyperreal<C> {
    type Output = Hyperreal<C>;

    fn neg(self) -> Hyperreal<C> {
        Hyperreal {
            registry: self.registry.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
            truncated: self.truncated,
        }
    }
}

impl<C: Coeff> Neg for Hyperreal<C> {
    type Output = Hyperreal<C>;

    fn neg(self) -> Hyperreal<C> {
        -&self
    }
}
