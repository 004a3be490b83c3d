use std::cmp::Ordering;

use super::report::{ProbeKind, ProbeReport, Witness};
use super::{ProbeConfig, ProbeError};
use crate::expr::{Expr, PerturbedFn, Point};
use crate::hyperreal::{Coeff, Exponent, Hyperreal, MagnitudeClass};

const MVT_CELLS: i64 = 64;
const MVT_BISECTIONS: usize = 64;

fn small(w: &Witness<impl Coeff>) -> bool {
    matches!(w.class, MagnitudeClass::Zero | MagnitudeClass::Infinitesimal)
}

/// Coordinate axes, plus the diagonal when there is more than one.
fn directions(n: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    if n > 1 {
        out.push(vec![1; n]);
    }
    out
}

fn shift<C: Coeff>(a: &Point<C>, o: &Hyperreal<C>, d: &[i64]) -> Point<C> {
    Point::new(
        a.coords()
            .iter()
            .zip(d)
            .map(|(x, &k)| if k == 0 { x.clone() } else { x + &o.scale(&C::from_int(k)) })
            .collect(),
    )
}

fn require_standard<C: Coeff>(a: &Point<C>) -> Result<(), ProbeError> {
    if a.as_standard().is_none() {
        return Err(ProbeError::Precondition(format!("base point {a} is not standard")));
    }
    Ok(())
}

fn require_scalar<C: Coeff>(f: &PerturbedFn<C>) -> Result<(), ProbeError> {
    if f.arity() != 1 {
        return Err(ProbeError::Precondition(format!("needs a function of one variable, got arity {}", f.arity())));
    }
    Ok(())
}

/// Leading exponent of the override deviation at `p`, if `p` is overridden
/// by a value different from the body's.
fn override_deviation<C: Coeff>(f: &PerturbedFn<C>, p: &Point<C>) -> Result<Option<Exponent>, ProbeError> {
    let Some(o) = f.override_at(p) else { return Ok(None) };
    let body = f.body().eval(f.registry(), p.coords())?;
    Ok((&o.value - &body).leading_exponent().cloned())
}

/// A step of size `scale` resolves the override deviation at `p` only when it
/// is infinitely larger than that deviation.
fn above_deviation<C: Coeff>(f: &PerturbedFn<C>, p: &Point<C>, scale: &Exponent) -> Result<bool, ProbeError> {
    Ok(match override_deviation(f, p)? {
        Some(dev) => scale < &dev,
        None => true,
    })
}

/// `x ≈ a ⇒ f(x) ≈ f(a)` on the monad samples `a + o·d`.
pub fn s_continuity_probe<C: Coeff>(
    f: &PerturbedFn<C>,
    a: &Point<C>,
    cfg: &ProbeConfig,
) -> Result<ProbeReport<C>, ProbeError> {
    let offsets = cfg.offsets::<C>(f.registry())?;
    let fa = f.evaluate(a)?;
    let mut witnesses = Vec::new();
    for d in directions(f.arity()) {
        for o in &offsets {
            let x = shift(a, o, &d);
            let residual = &f.evaluate(&x)? - &fa;
            witnesses.push(Witness::new(vec![a.clone(), x], residual));
        }
    }
    Ok(ProbeReport::assemble(ProbeKind::SContinuity, cfg, witnesses, small, Vec::new()))
}

/// `η = (f(x) − f(y) − Df_x(x−y)) / |x−y|` must be infinitesimal for every
/// sampled pair in the monad of `a` with `|x−y|` above the threshold.
pub fn mu_increment_check<C: Coeff>(
    f: &PerturbedFn<C>,
    a: &Point<C>,
    cfg: &ProbeConfig,
) -> Result<ProbeReport<C>, ProbeError> {
    require_standard(a)?;
    let reg = f.registry();
    let offsets = cfg.offsets::<C>(reg)?;
    let threshold = cfg.threshold::<C>(reg)?;
    let n = f.arity();
    let gradient: Vec<Expr> = (0..n).map(|i| f.body().differentiate(i)).collect();
    let mut witnesses = Vec::new();
    let (mut below, mut unresolved) = (0usize, 0usize);
    for d in directions(n) {
        let mut samples = vec![a.clone()];
        samples.extend(offsets.iter().map(|o| shift(a, o, &d)));
        let mut cache = Vec::with_capacity(samples.len());
        for p in &samples {
            let value = f.evaluate(p)?;
            let grad = gradient.iter().map(|g| g.eval(reg, p.coords())).collect::<Result<Vec<_>, _>>()?;
            cache.push((value, grad));
        }
        for (i, x) in samples.iter().enumerate() {
            for (j, y) in samples.iter().enumerate() {
                if i == j {
                    continue;
                }
                let diff: Vec<Hyperreal<C>> =
                    x.coords().iter().zip(y.coords()).map(|(u, v)| u - v).collect();
                let norm = if n == 1 {
                    diff[0].abs()
                } else {
                    diff.iter().fold(Hyperreal::zero(reg), |acc, c| &acc + &(c * c)).sqrt_abs()?
                };
                if norm <= threshold {
                    below += 1;
                    continue;
                }
                let scale = norm.leading_exponent().expect("norm above threshold").clone();
                if !above_deviation(f, x, &scale)? || !above_deviation(f, y, &scale)? {
                    unresolved += 1;
                    continue;
                }
                let (fx, gx) = &cache[i];
                let fy = &cache[j].0;
                let linear = gx.iter().zip(&diff).fold(Hyperreal::zero(reg), |acc, (g, h)| &acc + &(g * h));
                let eta = (&(fx - fy) - &linear).checked_div(&norm)?;
                witnesses.push(Witness::new(vec![x.clone(), y.clone()], eta));
            }
        }
    }
    let mut notes = Vec::new();
    if below > 0 {
        notes.push(format!("{below} pairs skipped: |x-y| not above the threshold"));
    }
    if unresolved > 0 {
        notes.push(format!("{unresolved} pairs skipped: |x-y| not above an override deviation"));
    }
    Ok(ProbeReport::assemble(ProbeKind::Increment, cfg, witnesses, small, notes))
}

/// Searches a standard `c` between `st(x)` and `st(y)` with
/// `f(x) − f(y) − f'(c)(x−y) ≈ 0`.
///
/// The residual's standard part is scanned on a 64-cell grid and a sign
/// change is bisected 64 times. If the final bracket still straddles a sign
/// change of the standard part, the bracket certifies a root and the probe
/// passes even when the rational midpoint misses it by a tiny appreciable
/// amount.
pub fn mvt_check<C: Coeff>(
    f: &PerturbedFn<C>,
    x: &Hyperreal<C>,
    y: &Hyperreal<C>,
    cfg: &ProbeConfig,
) -> Result<ProbeReport<C>, ProbeError> {
    require_scalar(f)?;
    let reg = f.registry();
    let threshold = cfg.threshold::<C>(reg)?;
    let gap = (x - y).abs();
    if gap <= threshold {
        return Err(ProbeError::Precondition(format!("|x-y| = {gap} is not above the threshold {threshold}")));
    }
    let (sx, sy) = (x.standard_part(), y.standard_part());
    let (Ok(sx), Ok(sy)) = (sx, sy) else {
        return Err(ProbeError::Precondition("x and y must be nearstandard".into()));
    };
    let (px, py) = (Point::scalar(x.clone()), Point::scalar(y.clone()));
    let fx = f.evaluate(&px)?;
    let fy = f.evaluate(&py)?;
    let dx = x - y;
    let deriv = f.body().differentiate(0);
    let residual = |c: &C| -> Result<Hyperreal<C>, ProbeError> {
        let dc = deriv.eval(reg, &[Hyperreal::from_coeff(reg, c.clone())])?;
        Ok(&(&fx - &fy) - &(&dc * &dx))
    };
    let eta = |r: &Hyperreal<C>| r.checked_div(&gap);
    let witness = |c: &C, r: &Hyperreal<C>| -> Result<Witness<C>, ProbeError> {
        Ok(Witness::new(vec![px.clone(), py.clone(), Point::from_coeffs(reg, std::slice::from_ref(c))], eta(r)?))
    };
    let st_sign = |r: &Hyperreal<C>| r.standard_part().map(|s| s.sign());

    if sx == sy {
        let r = residual(&sx)?;
        let w = witness(&sx, &r)?;
        return Ok(ProbeReport::assemble(ProbeKind::Mvt, cfg, vec![w], small, Vec::new()));
    }
    let (lo, hi) = if sx.sub(&sy).sign() == Ordering::Less {
        (sx.clone(), sy.clone())
    } else {
        (sy.clone(), sx.clone())
    };
    let width = hi.sub(&lo);
    let mut grid = Vec::with_capacity(MVT_CELLS as usize + 1);
    for i in 0..=MVT_CELLS {
        let c = lo.add(&width.mul(&C::from_int(i)).div(&C::from_int(MVT_CELLS)));
        let r = residual(&c)?;
        let s = st_sign(&r)?;
        if s == Ordering::Equal {
            let w = witness(&c, &r)?;
            return Ok(ProbeReport::assemble(ProbeKind::Mvt, cfg, vec![w], small, Vec::new()));
        }
        grid.push((c, r, s));
    }
    let Some(cell) = grid.windows(2).position(|w| w[0].2 != w[1].2) else {
        // no sign change: report the extremes of the residual
        let st = |r: &Hyperreal<C>| r.standard_part().map(|s| s.approx_f64()).unwrap_or(f64::NAN);
        let min = grid.iter().min_by(|a, b| st(&a.1).total_cmp(&st(&b.1))).expect("grid is nonempty");
        let max = grid.iter().max_by(|a, b| st(&a.1).total_cmp(&st(&b.1))).expect("grid is nonempty");
        let witnesses = vec![witness(&min.0, &min.1)?, witness(&max.0, &max.1)?];
        let mut report = ProbeReport::assemble(ProbeKind::Mvt, cfg, witnesses, |_| false, Vec::new());
        report.notes.push("no sign change of st r(c) on the grid".into());
        return Ok(report);
    };
    let (mut a, mut b) = (grid[cell].clone(), grid[cell + 1].clone());
    for _ in 0..MVT_BISECTIONS {
        let mid = a.0.add(&b.0).div(&C::from_int(2));
        let r = residual(&mid)?;
        let s = st_sign(&r)?;
        if s == Ordering::Equal {
            let w = witness(&mid, &r)?;
            return Ok(ProbeReport::assemble(ProbeKind::Mvt, cfg, vec![w], small, Vec::new()));
        }
        if s == a.2 {
            a = (mid, r, s);
        } else {
            b = (mid, r, s);
        }
    }
    let certified = a.2 != b.2 && a.2 != Ordering::Equal && b.2 != Ordering::Equal;
    let (ca, ra) = (&a.0, &a.1);
    let w = witness(ca, ra)?;
    let mut notes = Vec::new();
    if certified {
        notes.push(format!(
            "st r changes sign on [{}, {}]; a root c lies in this bracket",
            a.0.to_text(),
            b.0.to_text()
        ));
    }
    Ok(ProbeReport::assemble(ProbeKind::Mvt, cfg, vec![w], |w| certified || small(w), notes))
}

/// `R = f(y) − Σ_{j≤k} f⁽ʲ⁾(a)/j! (y−a)^j` must satisfy `R/|y−a|^k ≈ 0`.
pub fn taylor_check<C: Coeff>(
    f: &PerturbedFn<C>,
    a: &Point<C>,
    k: usize,
    cfg: &ProbeConfig,
) -> Result<ProbeReport<C>, ProbeError> {
    require_scalar(f)?;
    require_standard(a)?;
    if k == 0 || k > cfg.max_taylor_order {
        return Err(ProbeError::Precondition(format!(
            "order {k} outside 1..={}",
            cfg.max_taylor_order
        )));
    }
    let reg = f.registry();
    let offsets = cfg.offsets::<C>(reg)?;
    let mut jet = vec![f.evaluate(a)?];
    let mut factorial = C::one();
    for j in 1..=k {
        factorial = factorial.mul(&C::from_int(j as i64));
        let d = f.nth_derivative_at(0, j, a)?;
        jet.push(d.scale(&C::one().div(&factorial)));
    }
    let mut witnesses = Vec::new();
    let mut unresolved = 0usize;
    for o in &offsets {
        let scale = o.leading_exponent().expect("offsets are nonzero").scale((k as i64).into());
        if !above_deviation(f, a, &scale)? {
            unresolved += 1;
            continue;
        }
        let y = shift(a, o, &[1]);
        let mut poly = Hyperreal::zero(reg);
        let mut power = Hyperreal::one(reg);
        for c in &jet {
            poly = &poly + &(c * &power);
            power = &power * o;
        }
        let r = &f.evaluate(&y)? - &poly;
        let ratio = r.checked_div(&o.abs().powi(k as i64)?)?;
        witnesses.push(Witness::new(vec![a.clone(), y], ratio));
    }
    let mut notes = Vec::new();
    if unresolved > 0 {
        notes.push(format!("{unresolved} samples skipped: |y-a|^k not above an override deviation"));
    }
    Ok(ProbeReport::assemble(ProbeKind::Taylor, cfg, witnesses, small, notes))
}

/// `(f∘g)'(a) ≈ f'(g(a))·g'(a)`, with `(f∘g)'` differentiated symbolically.
pub fn chain_rule_check<C: Coeff>(
    f: &PerturbedFn<C>,
    g: &PerturbedFn<C>,
    a: &C,
    cfg: &ProbeConfig,
) -> Result<ProbeReport<C>, ProbeError> {
    require_scalar(f)?;
    require_scalar(g)?;
    let reg = f.registry();
    let pa = Point::from_coeffs(reg, std::slice::from_ref(a));
    let dg = g.nth_derivative_at(0, 1, &pa)?;
    let class = dg.magnitude_class();
    if class != MagnitudeClass::Appreciable {
        return Err(ProbeError::InapplicableChainRule { value: dg.to_string(), class });
    }
    let lhs = f.compose(g)?.nth_derivative_at(0, 1, &pa)?;
    let ga = Point::scalar(g.evaluate(&pa)?);
    let rhs = &f.nth_derivative_at(0, 1, &ga)? * &dg;
    let w = Witness::new(vec![pa, ga], &lhs - &rhs);
    Ok(ProbeReport::assemble(ProbeKind::Chain, cfg, vec![w], small, Vec::new()))
}
