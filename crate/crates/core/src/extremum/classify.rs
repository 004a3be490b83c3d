use std::cmp::Ordering;

use super::{ExtremumError, TraceEntry, Verdict, VerdictKind};
use crate::expr::{Expr, PerturbedFn, Point};
use crate::hyperreal::{Coeff, Hyperreal, MagnitudeClass};
use crate::mucalc::{ProbeConfig, ProbeKind, ProbeReport, Witness};

pub const DEFAULT_MAX_ORDER: usize = 8;

fn require_scalar<C: Coeff>(f: &PerturbedFn<C>) -> Result<(), ExtremumError> {
    if f.arity() != 1 {
        return Err(ExtremumError::Precondition(format!(
            "needs a function of one variable, got arity {}",
            f.arity()
        )));
    }
    Ok(())
}

fn require_standard<C: Coeff>(f: &PerturbedFn<C>, a: &Point<C>) -> Result<(), ExtremumError> {
    if a.len() != f.arity() {
        return Err(ExtremumError::Eval(crate::expr::ExprError::ArityMismatch { expected: f.arity(), got: a.len() }));
    }
    if a.as_standard().is_none() {
        return Err(ExtremumError::Precondition(format!("point {a} is not standard")));
    }
    Ok(())
}

/// Partial derivatives at `a`; the report fails when one of them is not
/// infinitely close to zero.
pub fn necessary_check<C: Coeff>(f: &PerturbedFn<C>, a: &Point<C>) -> Result<ProbeReport<C>, ExtremumError> {
    require_standard(f, a)?;
    let mut witnesses = Vec::with_capacity(f.arity());
    let mut notes = Vec::with_capacity(f.arity());
    for i in 0..f.arity() {
        let w = Witness::new(vec![a.clone()], f.nth_derivative_at(i, 1, a)?);
        notes.push(format!("df/dx{} = {} ({})", i + 1, w.residual, w.class));
        witnesses.push(w);
    }
    let failure_witness = witnesses
        .iter()
        .find(|w| !matches!(w.class, MagnitudeClass::Zero | MagnitudeClass::Infinitesimal))
        .cloned();
    Ok(ProbeReport {
        probe: ProbeKind::Necessary,
        passed: failure_witness.is_none(),
        config: ProbeConfig::standard(f.registry()),
        witnesses,
        failure_witness,
        notes,
    })
}

/// Walks `k = 1..=max_order`; the first value not infinitely close to zero
/// decides by order and sign.
fn decide<C: Coeff>(
    max_order: usize,
    mut value_at: impl FnMut(usize) -> Result<Hyperreal<C>, ExtremumError>,
) -> Result<Verdict<C>, ExtremumError> {
    if max_order < 2 {
        return Err(ExtremumError::OrderTooSmall(max_order));
    }
    let mut trace = Vec::new();
    for k in 1..=max_order {
        let entry = TraceEntry::new(k, None, value_at(k)?);
        let zero = Hyperreal::zero(entry.value.registry());
        if entry.value.approx_eq(&zero) {
            trace.push(entry);
            continue;
        }
        let kind = if k == 1 {
            VerdictKind::NecessaryFailed
        } else if k % 2 == 1 {
            VerdictKind::NeitherOddOrder
        } else if entry.value.gg(&zero) {
            VerdictKind::MMinimizer
        } else {
            debug_assert!(entry.value.ll(&zero));
            VerdictKind::MMaximizer
        };
        trace.push(entry.clone());
        return Ok(Verdict::decided(kind, &entry, trace));
    }
    Ok(Verdict::inconclusive(trace))
}

/// Successive derivatives of the body, built incrementally.
fn derivative_chain(body: &Expr, var: usize) -> impl FnMut() -> Expr {
    let mut current = body.clone();
    move || {
        current = current.differentiate(var);
        current.clone()
    }
}

/// Higher-order test at a standard `a`: the first `f^(k)(a) ≉ 0` decides.
/// `k = 1` fails the necessary condition, odd `k` rules out an extremum,
/// even `k` gives an m-minimizer when `f^(k)(a) ≫ 0` and an m-maximizer when
/// `f^(k)(a) ≪ 0`.
pub fn classify_1d<C: Coeff>(f: &PerturbedFn<C>, a: &C, max_order: usize) -> Result<Verdict<C>, ExtremumError> {
    require_scalar(f)?;
    let reg = f.registry().clone();
    let at = Point::from_coeffs(&reg, std::slice::from_ref(a));
    let mut next = derivative_chain(f.body(), 0);
    decide(max_order, |_| Ok(next().eval(&reg, at.coords())?))
}

/// The classical higher-order test applied to `st(f)`: the same rules on
/// the standard parts of the derivatives.
pub fn st_oracle_classify<C: Coeff>(
    f: &PerturbedFn<C>,
    a: &C,
    max_order: usize,
) -> Result<Verdict<C>, ExtremumError> {
    require_scalar(f)?;
    let reg = f.registry().clone();
    let at = Point::from_coeffs(&reg, std::slice::from_ref(a));
    let mut next = derivative_chain(f.body(), 0);
    decide(max_order, |_| {
        let st = next().eval(&reg, at.coords())?.standard_part()?;
        Ok(Hyperreal::from_coeff(&reg, st))
    })
}

/// Gradient form of the necessary condition for `n ≥ 2`. A partial that is
/// not infinitely close to zero rules out an extremum; otherwise the result
/// is `Inconclusive`, since no multivariable sufficient condition is used.
pub fn gradient_test<C: Coeff>(f: &PerturbedFn<C>, a: &Point<C>) -> Result<Verdict<C>, ExtremumError> {
    if f.arity() < 2 {
        return Err(ExtremumError::Precondition(format!(
            "gradient test needs at least two variables, got {}",
            f.arity()
        )));
    }
    require_standard(f, a)?;
    let trace = (0..f.arity())
        .map(|i| Ok(TraceEntry::new(1, Some(i), f.nth_derivative_at(i, 1, a)?)))
        .collect::<Result<Vec<_>, ExtremumError>>()?;
    let failing = trace
        .iter()
        .find(|t| !matches!(t.class, MagnitudeClass::Zero | MagnitudeClass::Infinitesimal))
        .cloned();
    Ok(match failing {
        Some(entry) => Verdict::decided(VerdictKind::NecessaryFailed, &entry, trace),
        None => Verdict::inconclusive(trace),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum HessianClass {
    NotCritical,
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
    Degenerate,
}

/// Oracle extension: the classical second-order test on `st(f)` at a
/// standard point, by leading principal minors of the Hessian. This is a
/// statement about `st(f)` only, not a test on `f` itself.
pub fn st_hessian_oracle<C: Coeff>(f: &PerturbedFn<C>, a: &[C]) -> Result<HessianClass, ExtremumError> {
    if a.len() != f.arity() {
        return Err(ExtremumError::Eval(crate::expr::ExprError::ArityMismatch { expected: f.arity(), got: a.len() }));
    }
    let reg = f.registry();
    let tol = reg.policy().zero_tol;
    let at = Point::from_coeffs(reg, a);
    let n = f.arity();
    let gradient: Vec<Expr> = (0..n).map(|i| f.body().differentiate(i)).collect();
    for g in &gradient {
        if !g.eval(reg, at.coords())?.standard_part()?.is_negligible(tol) {
            return Ok(HessianClass::NotCritical);
        }
    }
    // upper[i][j - i] holds the (i, j) entry for j >= i
    let mut upper: Vec<Vec<C>> = Vec::with_capacity(n);
    for (i, g) in gradient.iter().enumerate() {
        let row = (i..n).map(|j| g.differentiate(j).eval(reg, at.coords())?.standard_part().map_err(Into::into));
        upper.push(row.collect::<Result<_, ExtremumError>>()?);
    }
    let hessian: Vec<Vec<C>> = (0..n)
        .map(|i| (0..n).map(|j| if j >= i { upper[i][j - i].clone() } else { upper[j][i - j].clone() }).collect())
        .collect();
    let minors: Vec<Ordering> = (1..=n)
        .map(|k| {
            let d = determinant(hessian[..k].iter().map(|row| row[..k].to_vec()).collect(), tol);
            if d.is_negligible(tol) {
                Ordering::Equal
            } else {
                d.sign()
            }
        })
        .collect();
    let alternating = |k: usize| if k % 2 == 1 { Ordering::Less } else { Ordering::Greater };
    Ok(if minors.iter().all(|&s| s == Ordering::Greater) {
        HessianClass::PositiveDefinite
    } else if minors.iter().enumerate().all(|(i, &s)| s == alternating(i + 1)) {
        HessianClass::NegativeDefinite
    } else if minors[n - 1] != Ordering::Equal {
        HessianClass::Indefinite
    } else {
        HessianClass::Degenerate
    })
}

fn determinant<C: Coeff>(mut m: Vec<Vec<C>>, tol: f64) -> C {
    let n = m.len();
    let mut det = C::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_negligible(tol)) else {
            return C::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = det.neg();
        }
        let p = m[col][col].clone();
        det = det.mul(&p);
        let (top, below) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in below {
            let factor = row[col].div(&p);
            for (x, y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = x.sub(&factor.mul(y));
            }
        }
    }
    det
}
