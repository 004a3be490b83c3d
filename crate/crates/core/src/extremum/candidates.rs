use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::ExtremumError;
use crate::expr::{Expr, PerturbedFn};
use crate::hyperreal::{Coeff, GeneratorRegistry, Hyperreal, Rational};

const BISECTIONS: usize = 80;
const SNAP_BITS: i32 = 40;
const SNAP_DENOMINATOR: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateSource {
    /// `st f'` vanishes at a grid point.
    Grid,
    /// `st f'` changes sign inside a grid cell.
    SignChange,
    /// `st f''` changes sign and `st f'` vanishes at its root.
    Touch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<C: Coeff = Rational> {
    pub point: C,
    /// Final bisection bracket; degenerate for grid zeros.
    pub bracket: (C, C),
    pub source: CandidateSource,
    /// Whether `point` was replaced by a nearby small-denominator rational.
    pub snapped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet<C: Coeff = Rational> {
    pub interval: (Rational, Rational),
    pub grid_points: usize,
    pub candidates: Vec<Candidate<C>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateJson {
    pub point: String,
    pub bracket: [String; 2],
    pub source: CandidateSource,
    pub snapped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSetJson {
    pub interval: [String; 2],
    pub grid_points: usize,
    pub candidates: Vec<CandidateJson>,
}

impl<C: Coeff> CandidateSet<C> {
    pub fn points(&self) -> Vec<C> {
        self.candidates.iter().map(|c| c.point.clone()).collect()
    }

    pub fn to_json(&self) -> CandidateSetJson {
        let text = |r: &Rational| C::from_rational(r).to_text();
        CandidateSetJson {
            interval: [text(&self.interval.0), text(&self.interval.1)],
            grid_points: self.grid_points,
            candidates: self
                .candidates
                .iter()
                .map(|c| CandidateJson {
                    point: c.point.to_text(),
                    bracket: [c.bracket.0.to_text(), c.bracket.1.to_text()],
                    source: c.source,
                    snapped: c.snapped,
                })
                .collect(),
        }
    }
}

struct StandardPart<'a> {
    expr: Expr,
    registry: &'a std::sync::Arc<GeneratorRegistry>,
}

impl StandardPart<'_> {
    fn at<C: Coeff>(&self, x: &C) -> Result<C, ExtremumError> {
        let arg = Hyperreal::from_coeff(self.registry, x.clone());
        Ok(self.expr.eval(self.registry, &[arg])?.standard_part()?)
    }

    fn sign_at<C: Coeff>(&self, x: &C) -> Result<Ordering, ExtremumError> {
        let v = self.at(x)?;
        Ok(if v.is_negligible(self.registry.policy().zero_tol) { Ordering::Equal } else { v.sign() })
    }

    /// Bisects a strict sign change on `[l, r]`.
    fn bisect<C: Coeff>(&self, mut l: C, mut r: C, left_sign: Ordering) -> Result<(C, C), ExtremumError> {
        let half = C::from_rational(&Rational::new(BigInt::one(), BigInt::from(2)));
        for _ in 0..BISECTIONS {
            let mid = l.add(&r).mul(&half);
            match self.sign_at(&mid)? {
                Ordering::Equal => return Ok((mid.clone(), mid)),
                s if s == left_sign => l = mid,
                _ => r = mid,
            }
        }
        Ok((l, r))
    }
}

fn opposite(a: Ordering, b: Ordering) -> bool {
    a != Ordering::Equal && b != Ordering::Equal && a != b
}

fn midpoint<C: Coeff>(bracket: &(C, C)) -> C {
    bracket.0.add(&bracket.1).mul(&C::from_rational(&Rational::new(BigInt::one(), BigInt::from(2))))
}

/// Closest rational to `x` with denominator at most `max_den`, by continued
/// fraction convergents and the last semiconvergent.
pub(super) fn best_rational(x: &Rational, max_den: &BigInt) -> Rational {
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rem = x.clone();
    loop {
        let a = rem.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if &k2 > max_den {
            let t = (max_den - &k0) / &k1;
            let semi = Rational::new(&t * &h1 + &h0, &t * &k1 + &k0);
            let conv = Rational::new(h1, k1);
            return if (&semi - x).abs() < (&conv - x).abs() { semi } else { conv };
        }
        let frac = &rem - Rational::from_integer(a);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if frac.is_zero() {
            return Rational::new(h1, k1);
        }
        rem = frac.recip();
    }
}

/// Replaces `x` by a nearby small-denominator rational when `st f'`
/// vanishes exactly there.
fn snap<C: Coeff>(fprime: &StandardPart<'_>, x: &C) -> Result<Option<C>, ExtremumError> {
    let Some(exact) = x.to_rational() else { return Ok(None) };
    let q = best_rational(&exact, &BigInt::from(SNAP_DENOMINATOR));
    let tolerance = Rational::new(BigInt::one(), BigInt::one() << SNAP_BITS);
    if (&q - &exact).abs() > tolerance {
        return Ok(None);
    }
    let qc = C::from_rational(&q);
    Ok(fprime.at(&qc)?.is_exact_zero().then_some(qc))
}

/// Standard candidate points for an extremum of a function of one variable
/// on `[lo, hi]`: zeros of `st f'` found on an `m`-cell grid, by bisection of
/// sign changes, and at sign changes of `st f''` where `st f'` touches zero.
pub fn find_candidates<C: Coeff>(
    f: &PerturbedFn<C>,
    lo: &Rational,
    hi: &Rational,
    grid_points: usize,
) -> Result<CandidateSet<C>, ExtremumError> {
    if f.arity() != 1 {
        return Err(ExtremumError::Precondition(format!(
            "candidate search needs a function of one variable, got arity {}",
            f.arity()
        )));
    }
    if lo >= hi {
        return Err(ExtremumError::Precondition(format!("empty interval [{lo}, {hi}]")));
    }
    if grid_points < 2 {
        return Err(ExtremumError::Precondition(format!("grid needs at least 2 cells, got {grid_points}")));
    }
    let reg = f.registry();
    let tol = reg.policy().zero_tol;
    let d1 = f.body().differentiate(0);
    let d2 = d1.differentiate(0);
    let fprime = StandardPart { expr: d1, registry: reg };
    let fsecond = StandardPart { expr: d2, registry: reg };

    let m = BigInt::from(grid_points);
    let grid: Vec<C> = (0..=grid_points)
        .map(|i| C::from_rational(&(lo + (hi - lo) * Rational::new(BigInt::from(i), m.clone()))))
        .collect();
    let s1 = grid.iter().map(|x| fprime.sign_at(x)).collect::<Result<Vec<_>, _>>()?;
    let s2 = grid.iter().map(|x| fsecond.sign_at(x)).collect::<Result<Vec<_>, _>>()?;

    let mut found = Vec::new();
    for (x, s) in grid.iter().zip(&s1) {
        if *s == Ordering::Equal {
            found.push(Candidate { point: x.clone(), bracket: (x.clone(), x.clone()), source: CandidateSource::Grid, snapped: false });
        }
    }
    for i in 0..grid_points {
        if opposite(s1[i], s1[i + 1]) {
            let bracket = fprime.bisect(grid[i].clone(), grid[i + 1].clone(), s1[i])?;
            let mid = midpoint(&bracket);
            let (point, snapped) = match snap(&fprime, &mid)? {
                Some(q) => (q, true),
                None => (mid, false),
            };
            found.push(Candidate { point, bracket, source: CandidateSource::SignChange, snapped });
        }
        if opposite(s2[i], s2[i + 1]) {
            let bracket = fsecond.bisect(grid[i].clone(), grid[i + 1].clone(), s2[i])?;
            let mid = midpoint(&bracket);
            let (point, snapped) = match snap(&fprime, &mid)? {
                Some(q) => (q, true),
                None => (mid, false),
            };
            if fprime.at(&point)?.is_negligible(tol) {
                found.push(Candidate { point, bracket, source: CandidateSource::Touch, snapped });
            }
        }
    }

    found.sort_by(|a, b| a.point.sub(&b.point).sign());
    let merge = 2f64.powi(-SNAP_BITS);
    let mut candidates: Vec<Candidate<C>> = Vec::with_capacity(found.len());
    for c in found {
        match candidates.last() {
            Some(prev) if c.point.sub(&prev.point).approx_f64().abs() <= merge => {}
            _ => candidates.push(c),
        }
    }
    Ok(CandidateSet { interval: (lo.clone(), hi.clone()), grid_points, candidates })
}
