use std::cmp::Ordering;
use std::sync::Arc;

use num_rational::Rational64;

use super::ast::{Expr, Func};
use super::ExprError;
use crate::hyperreal::{Coeff, GeneratorRegistry, Hyperreal};

impl Expr {
    /// Evaluates with `args[i]` bound to `Var(i)`.
    pub fn eval<C: Coeff>(
        &self,
        registry: &Arc<GeneratorRegistry>,
        args: &[Hyperreal<C>],
    ) -> Result<Hyperreal<C>, ExprError> {
        Ok(match self {
            Expr::Const(c) => Hyperreal::from_rational(registry, c),
            Expr::Gen { index, power, .. } => Hyperreal::generator(registry, *index, *power)?,
            Expr::Var(i) => args
                .get(*i)
                .cloned()
                .ok_or(ExprError::ArityMismatch { expected: i + 1, got: args.len() })?,
            Expr::Neg(a) => -a.eval(registry, args)?,
            Expr::Add(a, b) => a.eval(registry, args)? + b.eval(registry, args)?,
            Expr::Sub(a, b) => a.eval(registry, args)? - b.eval(registry, args)?,
            Expr::Mul(a, b) => a.eval(registry, args)? * b.eval(registry, args)?,
            Expr::Div(a, b) => a.eval(registry, args)?.checked_div(&b.eval(registry, args)?)?,
            Expr::Pow(a, k) => a.eval(registry, args)?.powi(*k)?,
            Expr::Func(f, a) => lift(*f, &a.eval(registry, args)?)?,
        })
    }
}

/// `F(u)` for a finite `u`, as the Taylor polynomial of `F` at `st(u)`
/// evaluated at `u - st(u)` and cut where its powers leave the exponent box.
pub fn lift<C: Coeff>(func: Func, u: &Hyperreal<C>) -> Result<Hyperreal<C>, ExprError> {
    if !u.is_finite() {
        return Err(ExprError::InfiniteArgument { func, value: u.to_string() });
    }
    let reg = u.registry();
    let a = u.standard_part()?;
    if func == Func::Log && a.sign() != Ordering::Greater {
        return Err(ExprError::LogNonPositive(u.to_string()));
    }
    let h = u - &Hyperreal::from_coeff(reg, a.clone());
    let mut exact = true;
    let mut take = |x: crate::hyperreal::Approx<C>| {
        exact &= x.exact;
        x.value
    };
    // F^(j)(a) / j! = sum_b weight(b, j) * basis[b], with small rational
    // weights, so the long constants enter only once per basis element
    let basis: Vec<C> = match func {
        Func::Sin | Func::Cos => vec![take(a.sin()), take(a.cos())],
        Func::Exp => vec![take(a.exp())],
        Func::Log => vec![take(a.ln()), C::one()],
    };
    let unit = |k: i64| C::from_int(k);
    let weight = |b: usize, j: usize| -> C {
        match func {
            Func::Sin | Func::Cos => {
                let phase = if func == Func::Sin { j } else { j + 1 };
                let w = match (b, phase % 4) {
                    (0, 0) | (1, 1) => unit(1),
                    (0, 2) | (1, 3) => unit(-1),
                    _ => return C::zero(),
                };
                let mut factorial = C::one();
                for i in 2..=j {
                    factorial = factorial.mul(&unit(i as i64));
                }
                w.div(&factorial)
            }
            Func::Exp => {
                let mut factorial = C::one();
                for i in 2..=j {
                    factorial = factorial.mul(&unit(i as i64));
                }
                C::one().div(&factorial)
            }
            Func::Log if j == 0 => unit(if b == 0 { 1 } else { 0 }),
            Func::Log if b == 0 => C::zero(),
            // (-1)^(j+1) / (j a^j)
            Func::Log => {
                let mut v = C::one().div(&unit(j as i64));
                for _ in 0..j {
                    v = v.div(&a);
                }
                if j.is_multiple_of(2) {
                    v.neg()
                } else {
                    v
                }
            }
        }
    };
    let mut partial: Vec<Hyperreal<C>> = (0..basis.len()).map(|b| Hyperreal::from_coeff(reg, weight(b, 0))).collect();
    let mut cut = false;
    if let Some(lead) = h.leading_exponent().cloned() {
        let bound = reg.policy().exp_bound;
        let mut power = Hyperreal::one(reg);
        let mut j = 1usize;
        while lead.scale(Rational64::from_integer(j as i64)).within(bound) {
            power = &power * &h;
            if power.is_zero() {
                break;
            }
            for (b, acc) in partial.iter_mut().enumerate() {
                let w = weight(b, j);
                if !w.is_exact_zero() {
                    *acc = &*acc + &power.scale(&w);
                }
            }
            j += 1;
        }
        cut = true;
    }
    let mut sum = Hyperreal::zero(reg);
    for (acc, k) in partial.iter().zip(&basis) {
        sum = &sum + &acc.scale(k);
    }
    let sum = sum.mark_truncated(cut);
    Ok(sum.mark_truncated(!exact || u.is_truncated()))
}
