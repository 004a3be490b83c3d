//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line with its runtime; the process
//! exits nonzero if any criterion fails or overruns its time limit.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hyperopt::expr::{PerturbedFn, Point};
use hyperopt::extremum::{classify_1d, find_candidates, gradient_test, st_oracle_classify, VerdictKind};
use hyperopt::hyperreal::table::{interaction_table, TableClass, TableOp};
use hyperopt::hyperreal::{Coeff, Exponent, GeneratorRegistry, Hyperreal, MagnitudeClass, Rational};
use hyperopt::mucalc::{
    chain_rule_check, mvt_check, s_continuity_probe, taylor_check, Offset, ProbeConfig, ProbeError,
};

type H = Hyperreal<Rational>;
type Outcome = Result<String, String>;

const DEG7: &str = "1/7*x1^7 - 1/2*x1^6 + 2/5*x1^5 + eps*x1 + delta*x1^2";

fn reg() -> Arc<GeneratorRegistry> {
    GeneratorRegistry::standard()
}

fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

fn int(p: i64) -> Rational {
    q(p, 1)
}

fn func(text: &str, arity: usize) -> PerturbedFn {
    PerturbedFn::parse(text, arity, &reg()).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// `c · eps^i · delta^j`, built directly from exponents.
fn mono(c: i64, i: i64, j: i64) -> H {
    H::monomial(&reg(), Exponent::from_ints(&[i, j]), int(c)).unwrap()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn degree_seven_example() -> Outcome {
    let f = func(DEG7, 1);
    let c = |k: i64| mono(k, 0, 0);
    let (eps, delta) = (mono(1, 1, 0), mono(1, 0, 1));
    let two_delta = delta.scale(&int(2));
    let expected = [
        (0, VerdictKind::NeitherOddOrder, 5, 48, eps.clone(), two_delta.clone()),
        (1, VerdictKind::MMaximizer, 2, -1, &eps + &two_delta, &c(-1) + &two_delta),
        (2, VerdictKind::MMinimizer, 2, 16, &eps + &delta.scale(&int(4)), &c(16) + &two_delta),
    ];
    for (a, kind, order, st, d1, d2) in expected {
        let v = classify_1d(&f, &int(a), 8).map_err(|e| e.to_string())?;
        ensure!(v.kind == kind, "at {a}: {:?}", v.kind);
        ensure!(v.decisive_order == Some(order), "at {a}: order {:?}", v.decisive_order);
        ensure!(v.decisive_standard_part == Some(int(st)), "at {a}: st {:?}", v.decisive_standard_part);
        ensure!(v.derivative_trace[0].value == d1, "at {a}: f' = {}", v.derivative_trace[0].value);
        ensure!(v.derivative_trace[1].value == d2, "at {a}: f'' = {}", v.derivative_trace[1].value);
    }
    Ok("verdicts and f', f'' series exact at 0, 1, 2".into())
}

fn eq2_gradient(rng: &mut ChaCha8Rng) -> Outcome {
    let f = func("sin(eps*x1)/eps + x2", 2);
    for _ in 0..5 {
        let a = [q(rng.gen_range(-50..=50), rng.gen_range(1..=7)), q(rng.gen_range(-50..=50), rng.gen_range(1..=7))];
        let v = gradient_test(&f, &Point::standard(&reg(), &a)).map_err(|e| e.to_string())?;
        ensure!(v.kind == VerdictKind::NecessaryFailed, "at {a:?}: {:?}", v.kind);
        let d1 = v.derivative_trace[0].value.standard_part().unwrap();
        ensure!((d1.approx_f64() - 1.0).abs() <= 1e-12, "st d/dx1 = {d1}");
        ensure!(v.derivative_trace[1].value == H::one(&reg()), "d/dx2 = {}", v.derivative_trace[1].value);
    }
    Ok("5 random points: NecessaryFailed, st df/dx1 = 1, df/dx2 = 1".into())
}

/// Rows and columns in the order ε, a, ∞; `None` is `?`.
fn expected_table(op: TableOp) -> [[Option<TableClass>; 3]; 3] {
    use TableClass::{Appreciable as A, Infinite as I, Infinitesimal as E};
    match op {
        TableOp::AddSub => [[Some(E), Some(A), Some(I)], [Some(A), None, Some(I)], [Some(I), Some(I), None]],
        TableOp::Mul => [[Some(E), Some(E), None], [Some(E), Some(A), Some(I)], [None, Some(I), Some(I)]],
        TableOp::Div => [[None, Some(I), Some(I)], [Some(E), Some(A), Some(I)], [Some(E), Some(E), None]],
    }
}

/// Recomputes a witness from its printed operands.
fn recompute(lhs: &str, rhs: &str) -> H {
    let (op, y) = rhs.split_once(' ').unwrap();
    let (x, y) = (func(lhs, 0).evaluate(&Point::new(vec![])).unwrap(), func(y, 0).evaluate(&Point::new(vec![])).unwrap());
    match op {
        "+" => &x + &y,
        "-" => &x - &y,
        "*" => &x * &y,
        "/" => x.checked_div(&y).unwrap(),
        other => panic!("operator {other}"),
    }
}

fn interaction_tables() -> Outcome {
    let mut ambiguous = 0;
    for op in [TableOp::AddSub, TableOp::Mul, TableOp::Div] {
        let table = interaction_table::<Rational>(&reg(), op);
        for (i, row) in TableClass::ALL.iter().enumerate() {
            for (j, col) in TableClass::ALL.iter().enumerate() {
                let cell = table.cell(*row, *col);
                ensure!(cell.class == expected_table(op)[i][j], "{op:?} ({i},{j}): {:?}", cell.class);
                for w in &cell.witnesses {
                    let z = recompute(&w.lhs, &w.rhs);
                    ensure!(z.to_string() == w.result && z.magnitude_class() == w.class, "witness {w:?}");
                }
                if cell.class.is_none() {
                    ensure!(cell.witnesses.len() == 2, "{op:?} ({i},{j}) needs two witnesses");
                    let (a, b) = (&cell.witnesses[0], &cell.witnesses[1]);
                    ensure!(TableClass::of(a.class) != TableClass::of(b.class), "{op:?} ({i},{j}) witnesses agree");
                    ambiguous += 1;
                }
            }
        }
    }
    ensure!(ambiguous == 6, "{ambiguous} ambiguous cells");
    Ok("27 cells match; 6 `?` cells each shown by two disagreeing witnesses".into())
}

/// Coefficients of `c ∏ (x − r_i)`, lowest degree first.
fn from_roots(c: &Rational, roots: &[Rational]) -> Vec<Rational> {
    let mut coeffs = vec![c.clone()];
    for r in roots {
        let mut next = vec![<Rational as Zero>::zero(); coeffs.len() + 1];
        for (i, a) in coeffs.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        coeffs = next;
    }
    coeffs
}

/// An antiderivative of `c ∏ (x − r_i)` as body text.
fn antiderivative(c: &Rational, roots: &[Rational]) -> String {
    from_roots(c, roots)
        .iter()
        .enumerate()
        .map(|(j, a)| format!("({})*x1^{}", a / int(j as i64 + 1), j + 1))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn random_rational(rng: &mut ChaCha8Rng, range: i64, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    q(rng.gen_range(-range * d..=range * d), d)
}

fn nonzero_rational(rng: &mut ChaCha8Rng) -> Rational {
    let p = rng.gen_range(1..=10) * if rng.gen_bool(0.5) { 1 } else { -1 };
    q(p, rng.gen_range(1..=5))
}

/// `c·g·x^j` for random generators `g`.
fn infinitesimal_terms(rng: &mut ChaCha8Rng, count: usize, powers: &[&str]) -> String {
    (0..count)
        .map(|_| {
            let g = ["eps", "delta"][rng.gen_range(0..2)];
            let p = powers[rng.gen_range(0..powers.len())];
            format!(" + ({})*{g}^({p})*x1^{}", random_rational(rng, 10, 3), rng.gen_range(0..=6))
        })
        .collect()
}

fn add_overrides(rng: &mut ChaCha8Rng, mut f: PerturbedFn, points: &[Rational]) -> PerturbedFn {
    for p in points {
        let at = Point::standard(&reg(), std::slice::from_ref(p));
        let bump = mono(rng.gen_range(1..=5), rng.gen_range(1..=3), 0);
        let v = &f.evaluate(&at).unwrap() + &bump;
        f = f.with_override(vec![p.clone()], v).unwrap();
    }
    f
}

fn ponte_equivalence(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut functions, mut candidates) = (0, 0);
    while functions < 200 {
        let roots: Vec<Rational> = (0..rng.gen_range(3..=5))
            .map(|_| {
                let d = rng.gen_range(1..=3);
                q(rng.gen_range(-4 * d..=4 * d), d)
            })
            .collect();
        let mut distinct = roots.clone();
        distinct.sort();
        distinct.dedup();
        if distinct.len() < 3 {
            continue;
        }
        let (c, n) = (nonzero_rational(rng), rng.gen_range(1..=3));
        let body = antiderivative(&c, &roots) + &infinitesimal_terms(rng, n, &["1"]);
        let mut over: Vec<Rational> = (0..rng.gen_range(0..=2)).map(|_| int(rng.gen_range(-5..=5))).collect();
        if rng.gen_bool(0.5) {
            over.push(distinct[rng.gen_range(0..distinct.len())].clone());
        }
        over.sort();
        over.dedup();
        let f = add_overrides(rng, func(&body, 1), &over);
        let set = find_candidates(&f, &int(-5), &int(5), 100).map_err(|e| e.to_string())?;
        ensure!(set.candidates.len() >= 3, "only {} candidates for {body}", set.candidates.len());
        for a in set.points() {
            let v = classify_1d(&f, &a, 8).map_err(|e| e.to_string())?;
            let o = st_oracle_classify(&f, &a, 8).map_err(|e| e.to_string())?;
            ensure!(v.kind == o.kind, "{body} at {a}: {:?} vs oracle {:?}", v.kind, o.kind);
            candidates += 1;
        }
        functions += 1;
    }
    Ok(format!("{functions} functions, {candidates} candidates, 100% agreement"))
}

fn random_finite(rng: &mut ChaCha8Rng) -> H {
    let terms = (0..rng.gen_range(1..=4))
        .map(|_| {
            let e = if rng.gen_bool(0.4) {
                Exponent::zero(2)
            } else {
                Exponent::new(vec![
                    Rational64::new(rng.gen_range(0..=6), rng.gen_range(1..=2)),
                    Rational64::from_integer(rng.gen_range(0..=3)),
                ])
            };
            (e, random_rational(rng, 20, 9))
        })
        .collect();
    H::make(&reg(), terms).unwrap()
}

fn standard_part_homomorphism(rng: &mut ChaCha8Rng) -> Outcome {
    let mut divisions = 0;
    for _ in 0..1000 {
        let (x, y) = (random_finite(rng), random_finite(rng));
        let (sx, sy) = (x.standard_part().unwrap(), y.standard_part().unwrap());
        ensure!((&x + &y).standard_part().unwrap() == &sx + &sy, "st(x+y) for {x}, {y}");
        ensure!((&x - &y).standard_part().unwrap() == &sx - &sy, "st(x-y) for {x}, {y}");
        ensure!((&x * &y).standard_part().unwrap() == &sx * &sy, "st(xy) for {x}, {y}");
        if !sy.is_zero() {
            let quotient = x.checked_div(&y).map_err(|e| e.to_string())?;
            ensure!(quotient.standard_part().unwrap() == &sx / &sy, "st(x/y) for {x}, {y}");
            divisions += 1;
        }
    }
    Ok(format!("1000 pairs, {divisions} quotients, all exact"))
}

fn random_poly(rng: &mut ChaCha8Rng, degree: u32) -> String {
    (0..=degree)
        .map(|j| {
            let eps = if rng.gen_bool(0.3) { format!(" + ({})*eps", rng.gen_range(-3..=3)) } else { String::new() };
            format!("({}{eps})*x1^{j}", random_rational(rng, 3, 2))
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// A small smooth expression in `x1` with infinitesimal coefficients.
fn random_smooth(rng: &mut ChaCha8Rng) -> String {
    let degree = rng.gen_range(1..=2);
    let p = random_poly(rng, degree);
    match rng.gen_range(0..6) {
        0 => {
            let degree = rng.gen_range(2..=4);
            random_poly(rng, degree)
        }
        1 => format!("sin({p})"),
        2 => format!("cos({p})"),
        3 => format!("exp(({p})/4)"),
        4 => format!("({p})*sin(x1)"),
        _ => format!("{p} + cos(2*x1 + eps)"),
    }
}

fn taylor_remainders(rng: &mut ChaCha8Rng) -> Outcome {
    let cfg = ProbeConfig::standard(&reg());
    for _ in 0..50 {
        let body = random_smooth(rng);
        let f = func(&body, 1);
        let a = Point::standard(&reg(), &[q(rng.gen_range(-4..=4), 2)]);
        for k in 1..=3 {
            let r = taylor_check(&f, &a, k, &cfg).map_err(|e| format!("{body}: {e}"))?;
            ensure!(r.passed, "{body} at {a}, k={k}: {:?}", r.failure_witness);
            ensure!(
                r.witnesses.iter().all(|w| matches!(w.class, MagnitudeClass::Zero | MagnitudeClass::Infinitesimal)),
                "{body}: appreciable ratio"
            );
        }
    }
    Ok("50 expressions x k=1,2,3 passed".into())
}

fn nearstandard(rng: &mut ChaCha8Rng, st: &Rational) -> H {
    let jitter = match rng.gen_range(0..3) {
        0 => mono(rng.gen_range(-3..=3), 1, 0),
        1 => mono(rng.gen_range(-3..=3), 0, 1),
        _ => &mono(rng.gen_range(-3..=3), 2, 0) + &mono(1, 1, 1),
    };
    &H::from_rational(&reg(), st) + &jitter
}

fn mvt_and_chain(rng: &mut ChaCha8Rng) -> Outcome {
    let cfg = ProbeConfig::standard(&reg());
    for _ in 0..50 {
        let degree = rng.gen_range(2..=5);
        let body = random_poly(rng, degree) + &infinitesimal_terms(rng, 2, &["1", "2"]);
        let f = func(&body, 1);
        let s = random_rational(rng, 3, 4);
        let t = loop {
            let t = random_rational(rng, 3, 4);
            if t != s {
                break t;
            }
        };
        let (x, y) = (nearstandard(rng, &s), nearstandard(rng, &t));
        let r = mvt_check(&f, &x, &y, &cfg).map_err(|e| format!("{body}: {e}"))?;
        ensure!(r.passed, "mvt {body} on [{x}, {y}]: {:?} {:?}", r.failure_witness, r.notes);
    }
    let mut chains = 0;
    while chains < 50 {
        let (fb, gb) = (random_smooth(rng), random_smooth(rng));
        let (f, g) = (func(&fb, 1), func(&gb, 1));
        let a = q(rng.gen_range(-4..=4), 2);
        let at = Point::standard(&reg(), std::slice::from_ref(&a));
        if g.nth_derivative_at(0, 1, &at).unwrap().magnitude_class() != MagnitudeClass::Appreciable {
            continue;
        }
        let r = chain_rule_check(&f, &g, &a, &cfg).map_err(|e| format!("{fb} o {gb}: {e}"))?;
        ensure!(r.passed, "chain {fb} o {gb} at {a}: {:?}", r.failure_witness);
        let flat = func(&format!("eps*({gb})"), 1);
        let refused = chain_rule_check(&f, &flat, &a, &cfg);
        ensure!(
            matches!(refused, Err(ProbeError::InapplicableChainRule { .. })),
            "eps*({gb}) at {a} was not refused"
        );
        chains += 1;
    }
    Ok("50 MVT pairs passed; 50 chain pairs passed; 50 infinitesimal g' refused".into())
}

fn continuity_examples() -> Outcome {
    let r = reg();
    let f = func("x1^2", 1);
    let cfg = ProbeConfig::standard(&r);
    for a in [-3, 0, 2, 7] {
        let report = s_continuity_probe(&f, &Point::standard(&r, &[int(a)]), &cfg).map_err(|e| e.to_string())?;
        ensure!(report.passed, "x^2 at {a}: {:?}", report.failure_witness);
    }
    let omega = H::generator(&r, 0, Rational64::from_integer(-1)).unwrap();
    let mut at_infinity = cfg.clone();
    at_infinity.sample_offsets = vec![Offset(omega.recip().unwrap().to_json_terms())];
    let report = s_continuity_probe(&f, &Point::scalar(omega), &at_infinity).map_err(|e| e.to_string())?;
    ensure!(!report.passed, "x^2 passed at omega");
    let w = report.failure_witness.unwrap();
    ensure!(w.class == MagnitudeClass::Appreciable, "class {}", w.class);
    ensure!(w.residual == &mono(2, 0, 0) + &mono(1, 2, 0), "residual {}", w.residual);
    ensure!(w.residual.standard_part().unwrap() == int(2), "standard part");
    Ok(format!("passes at standard points; at omega residual {} ({})", w.residual, w.class))
}

fn perturbation_invariance(rng: &mut ChaCha8Rng) -> Outcome {
    let mut checked = 0;
    while checked < 100 {
        let roots: Vec<Rational> = (0..rng.gen_range(1..=5)).map(|_| random_rational(rng, 3, 2)).collect();
        let base = antiderivative(&nonzero_rational(rng), &roots);
        let a = if rng.gen_bool(0.7) { roots[rng.gen_range(0..roots.len())].clone() } else { random_rational(rng, 3, 3) };
        let f = func(&base, 1);
        let v = classify_1d(&f, &a, 8).map_err(|e| e.to_string())?;
        let Some(dv) = v.decisive_value.clone() else { continue };
        if dv.magnitude_class() != MagnitudeClass::Appreciable {
            continue;
        }
        let n = rng.gen_range(1..=3);
        let noisy = base.clone() + &infinitesimal_terms(rng, n, &["1", "3/2", "2"]);
        let mut over = vec![int(rng.gen_range(-3..=3))];
        if rng.gen_bool(0.5) && a != over[0] {
            over.push(a.clone());
        }
        let g = add_overrides(rng, func(&noisy, 1), &over);
        let w = classify_1d(&g, &a, 8).map_err(|e| e.to_string())?;
        ensure!(w.kind == v.kind && w.decisive_order == v.decisive_order, "{noisy} at {a}: {:?} vs {:?}", w.kind, v.kind);
        ensure!(w.decisive_value.unwrap().approx_eq(&dv), "{noisy} at {a}: decisive value moved");
        checked += 1;
    }
    Ok("100 functions, verdict kind and order unchanged".into())
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    check: Box<dyn Fn(&mut ChaCha8Rng) -> Outcome>,
}

fn main() -> ExitCode {
    let criteria = vec![
        Criterion { id: 1, name: "degree-7 example, exact", limit: Duration::from_secs(1), check: Box::new(|_| degree_seven_example()) },
        Criterion { id: 2, name: "sin(eps x1)/eps + x2 gradient", limit: Duration::from_secs(1), check: Box::new(eq2_gradient) },
        Criterion { id: 3, name: "interaction tables", limit: Duration::from_secs(1), check: Box::new(|_| interaction_tables()) },
        Criterion { id: 4, name: "classify vs st-oracle fuzz", limit: Duration::from_secs(30), check: Box::new(ponte_equivalence) },
        Criterion { id: 5, name: "standard-part homomorphism", limit: Duration::from_secs(5), check: Box::new(standard_part_homomorphism) },
        Criterion { id: 6, name: "Taylor remainder order", limit: Duration::from_secs(10), check: Box::new(taylor_remainders) },
        Criterion { id: 7, name: "MVT and chain-rule probes", limit: Duration::from_secs(10), check: Box::new(mvt_and_chain) },
        Criterion { id: 8, name: "continuity examples", limit: Duration::from_secs(1), check: Box::new(|_| continuity_examples()) },
        Criterion { id: 9, name: "perturbation invariance", limit: Duration::from_secs(10), check: Box::new(perturbation_invariance) },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + u64::from(c.id));
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| (c.check)(&mut rng)))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= c.limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {:?} limit", c.limit)),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {} [{}] {status} in {:.3}s: {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
