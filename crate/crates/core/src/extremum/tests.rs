use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use super::candidates::best_rational;
use super::*;
use crate::expr::{PerturbedFn, Point};
use crate::hyperreal::{GeneratorRegistry, Hyperreal, MagnitudeClass, Rational};

type H = Hyperreal<Rational>;

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
    PerturbedFn::parse(text, arity, &reg()).unwrap()
}

fn value(text: &str) -> H {
    func(text, 0).evaluate(&Point::new(vec![])).unwrap()
}

fn at(xs: &[i64]) -> Point {
    Point::standard(&reg(), &xs.iter().map(|&x| int(x)).collect::<Vec<_>>())
}

fn trace_value(v: &Verdict, k: usize) -> H {
    v.derivative_trace.iter().find(|t| t.k == k).unwrap().value.clone()
}

#[test]
fn degree_seven_example() {
    let f = func(DEG7, 1);
    let cases = [
        (0, VerdictKind::NeitherOddOrder, 5, "48", 48, ["eps", "2*delta"]),
        (1, VerdictKind::MMaximizer, 2, "-1 + 2*delta", -1, ["eps + 2*delta", "-1 + 2*delta"]),
        (2, VerdictKind::MMinimizer, 2, "16 + 2*delta", 16, ["eps + 4*delta", "16 + 2*delta"]),
    ];
    for (a, kind, order, decisive, st, [d1, d2]) in cases {
        let v = classify_1d(&f, &int(a), 8).unwrap();
        assert_eq!(v.kind, kind, "at {a}");
        assert_eq!(v.decisive_order, Some(order));
        assert_eq!(v.decisive_value, Some(value(decisive)));
        assert_eq!(v.decisive_standard_part, Some(int(st)));
        assert_eq!(trace_value(&v, 1), value(d1));
        assert_eq!(trace_value(&v, 2), value(d2));
        assert_eq!(v.derivative_trace.len(), order);
    }
    let at0 = classify_1d(&f, &int(0), 8).unwrap();
    assert_eq!(trace_value(&at0, 3), value("0"));
    assert_eq!(trace_value(&at0, 4), value("0"));
    assert_eq!(at0.derivative_trace[2].class, MagnitudeClass::Zero);
}

#[test]
fn infinitesimal_shape_is_inconclusive() {
    let f = func("eps*x1^4", 1);
    let v = classify_1d(&f, &int(0), 8).unwrap();
    assert_eq!(v.kind, VerdictKind::Inconclusive);
    assert_eq!(v.decisive_order, None);
    assert_eq!(v.derivative_trace.len(), 8);
    assert_eq!(trace_value(&v, 4), value("24*eps"));
    assert_eq!(st_oracle_classify(&f, &int(0), 8).unwrap().kind, VerdictKind::Inconclusive);
}

#[test]
fn quartic_bowl_with_a_tilt() {
    let f = func("x1^4 + eps*x1", 1);
    let v = classify_1d(&f, &int(0), 8).unwrap();
    assert_eq!(v.kind, VerdictKind::MMinimizer);
    assert_eq!(v.decisive_order, Some(4));
    let o = st_oracle_classify(&f, &int(0), 8).unwrap();
    assert_eq!(o.kind, VerdictKind::MMinimizer);
    assert_eq!(o.decisive_standard_part, Some(int(24)));
}

#[test]
fn oracle_on_the_degree_seven_example() {
    let f = func(DEG7, 1);
    let v = st_oracle_classify(&f, &int(2), 8).unwrap();
    assert_eq!((v.kind, v.decisive_standard_part), (VerdictKind::MMinimizer, Some(int(16))));
    let v = st_oracle_classify(&f, &int(0), 8).unwrap();
    assert_eq!((v.kind, v.decisive_order), (VerdictKind::NeitherOddOrder, Some(5)));
    assert_eq!(v.decisive_value, Some(value("48")));
}

#[test]
fn classify_rejects_bad_input() {
    let f = func(DEG7, 1);
    assert_eq!(classify_1d(&f, &int(0), 1), Err(ExtremumError::OrderTooSmall(1)));
    assert!(matches!(classify_1d(&func("x1*x2", 2), &int(0), 4), Err(ExtremumError::Precondition(_))));
    assert!(matches!(
        classify_1d(&func("log(x1)", 1), &int(0), 4),
        Err(ExtremumError::Eval(_))
    ));
    assert!(matches!(gradient_test(&f, &at(&[0])), Err(ExtremumError::Precondition(_))));
}

#[test]
fn infinite_decisive_value_has_no_standard_part() {
    let v = classify_1d(&func("x1^2/eps", 1), &int(0), 4).unwrap();
    assert_eq!(v.kind, VerdictKind::MMinimizer);
    assert_eq!(v.decisive_standard_part, None);
    assert_eq!(v.derivative_trace[1].class, MagnitudeClass::Infinite);
}

#[test]
fn necessary_check_examples() {
    let r = necessary_check(&func(DEG7, 1), &at(&[1])).unwrap();
    assert!(r.passed);
    assert_eq!(r.witnesses[0].residual, value("eps + 2*delta"));
    assert_eq!(r.witnesses[0].class, MagnitudeClass::Infinitesimal);

    let r = necessary_check(&func("sin(eps*x1)/eps + x2", 2), &at(&[3, -2])).unwrap();
    assert!(!r.passed);
    assert_eq!(r.witnesses[0].residual.standard_part().unwrap(), int(1));
    assert_eq!(r.witnesses[1].residual, value("1"));
    assert_eq!(r.notes.len(), 2);

    let r = necessary_check(&func("x1^2", 1), &at(&[1])).unwrap();
    assert!(!r.passed);
    assert_eq!(r.failure_witness.unwrap().class, MagnitudeClass::Appreciable);

    let off = Point::new(vec![&H::from_int(&reg(), 1) + &value("eps")]);
    assert!(matches!(necessary_check(&func("x1^2", 1), &off), Err(ExtremumError::Precondition(_))));
}

#[test]
fn gradient_examples() {
    let eq2 = func("sin(eps*x1)/eps + x2", 2);
    let v = gradient_test(&eq2, &at(&[0, 0])).unwrap();
    assert_eq!(v.kind, VerdictKind::NecessaryFailed);
    assert_eq!(v.decisive_standard_part, Some(int(1)));

    let bowl = func("x1^2 + x2^2 + eps*x1", 2);
    let v = gradient_test(&bowl, &at(&[0, 0])).unwrap();
    assert_eq!(v.kind, VerdictKind::Inconclusive);
    assert_eq!(v.derivative_trace[0].value, value("eps"));
    assert_eq!(v.derivative_trace[1].value, value("0"));
    assert_eq!(v.derivative_trace[1].var, Some(1));

    let v = gradient_test(&func("x1^2 + x2^2", 2), &at(&[1, 0])).unwrap();
    assert_eq!(v.kind, VerdictKind::NecessaryFailed);
    assert_eq!(v.decisive_value, Some(value("2")));
}

#[test]
fn hessian_oracle_extension() {
    let z = [int(0), int(0)];
    let class = |text: &str| st_hessian_oracle(&func(text, 2), &z).unwrap();
    assert_eq!(class("x1^2 + x2^2 + eps*x1"), HessianClass::PositiveDefinite);
    assert_eq!(class("-x1^2 - 3*x2^2 + x1*x2"), HessianClass::NegativeDefinite);
    assert_eq!(class("x1^2 - x2^2"), HessianClass::Indefinite);
    assert_eq!(class("x1^4 + x2^2"), HessianClass::Degenerate);
    assert_eq!(class("x1 + x2^2"), HessianClass::NotCritical);
}

#[test]
fn verdict_json_shape() {
    let v = classify_1d(&func(DEG7, 1), &int(1), 8).unwrap();
    let json = serde_json::to_string(&v.to_json()).unwrap();
    assert!(json.starts_with(
        "{\"kind\":\"MMaximizer\",\"decisive_order\":2,\"decisive_value\":\"-1 + 2*delta\",\"standard_part\":\"-1\",\"trace\":["
    ));
    let back: VerdictJson = serde_json::from_str(&json).unwrap();
    assert_eq!(back, v.to_json());
    let g = gradient_test(&func("x1^2 + x2^2", 2), &at(&[1, 0])).unwrap().to_json();
    assert_eq!(g.trace[0].var, Some(1));
}

#[test]
fn candidates_of_the_degree_seven_example() {
    let set = find_candidates(&func(DEG7, 1), &int(-1), &int(3), 64).unwrap();
    assert_eq!(set.points(), vec![int(0), int(1), int(2)]);
    let kinds: Vec<VerdictKind> = set
        .points()
        .iter()
        .map(|a| classify_1d(&func(DEG7, 1), a, 8).unwrap().kind)
        .collect();
    assert_eq!(kinds, [VerdictKind::NeitherOddOrder, VerdictKind::MMaximizer, VerdictKind::MMinimizer]);
}

#[test]
fn candidate_search_examples() {
    let set = find_candidates(&func("x1^2", 1), &int(-1), &int(1), 64).unwrap();
    assert_eq!(set.points(), vec![int(0)]);
    let set = find_candidates(&func("x1^3 + 1", 1), &int(1), &int(2), 64).unwrap();
    assert!(set.candidates.is_empty());
    // root 1/3 is off the grid and recovered exactly by snapping
    let set = find_candidates(&func("(x1 - 1/3)^2", 1), &int(-1), &int(1), 10).unwrap();
    assert_eq!(set.points(), vec![q(1, 3)]);
    assert!(set.candidates[0].snapped);
    // a touching zero of f' between grid points
    let set = find_candidates(&func("(x1 - 1/3)^3", 1), &int(-1), &int(1), 10).unwrap();
    assert_eq!(set.points(), vec![q(1, 3)]);
    assert_eq!(set.candidates[0].source, CandidateSource::Touch);
    // an irrational root is bracketed, not snapped
    let set = find_candidates(&func("x1^3/3 - 2*x1", 1), &int(0), &int(2), 8).unwrap();
    assert_eq!(set.candidates.len(), 1);
    let c = &set.candidates[0];
    assert!(!c.snapped);
    let (lo, hi) = (&c.bracket.0, &c.bracket.1);
    assert!(lo * lo < int(2) && hi * hi > int(2));
    assert!(find_candidates(&func("x1", 1), &int(1), &int(1), 8).is_err());
    assert!(find_candidates(&func("x1", 1), &int(0), &int(1), 1).is_err());
}

#[test]
fn best_rational_approximation() {
    let m = BigInt::from(1_000_000);
    assert_eq!(best_rational(&q(1, 3), &m), q(1, 3));
    assert_eq!(best_rational(&q(-7, 2), &m), q(-7, 2));
    assert_eq!(best_rational(&q(314_159_265, 100_000_000), &BigInt::from(1000)), q(355, 113));
    let near = q(1, 3) + Rational::new(BigInt::one(), BigInt::one() << 60);
    assert_eq!(best_rational(&near, &m), q(1, 3));
    assert_eq!(best_rational(&<Rational as Zero>::zero(), &m), <Rational as Zero>::zero());
}

#[test]
fn float_mode_classification() {
    let r = GeneratorRegistry::standard();
    let f = PerturbedFn::<f64>::parse(DEG7, 1, &r).unwrap();
    let v = classify_1d(&f, &1.0, 8).unwrap();
    assert_eq!(v.kind, VerdictKind::MMaximizer);
    assert_eq!(v.decisive_standard_part, Some(-1.0));
    let set = find_candidates(&f, &int(-1), &int(3), 64).unwrap();
    assert_eq!(set.points(), vec![0.0, 1.0, 2.0]);
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

/// Body text of an antiderivative of `c ∏ (x − r_i)` plus `ε·p(x) + δ·q(x)`.
fn integrated_text(c: &Rational, roots: &[Rational], eps_terms: &[(i64, u32)], delta_terms: &[(i64, u32)]) -> String {
    let mut parts: Vec<String> = from_roots(c, roots)
        .iter()
        .enumerate()
        .map(|(j, a)| format!("({})*x1^{}", a / int(j as i64 + 1), j + 1))
        .collect();
    parts.extend(eps_terms.iter().map(|(k, j)| format!("({k})*eps*x1^{j}")));
    parts.extend(delta_terms.iter().map(|(k, j)| format!("({k})*delta*x1^{j}")));
    parts.join(" + ")
}

fn with_eps_override(f: PerturbedFn, x: i64, k: i64) -> PerturbedFn {
    let v = f.evaluate(&at(&[x])).unwrap();
    let bump = value("eps^2").scale(&int(k));
    f.with_override(vec![int(x)], &v + &bump).unwrap()
}

fn root_strategy() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-12i64..=12, 1i64..=4), 1..=5)
        .prop_map(|v| v.into_iter().map(|(p, d)| q(p, d)).collect())
}

fn terms() -> impl Strategy<Value = Vec<(i64, u32)>> {
    prop::collection::vec((-4i64..=4, 0u32..=5), 0..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ponte_equivalence_at_candidates(
        c in prop_oneof![-5i64..=-1, 1i64..=5],
        roots in root_strategy(),
        eps_terms in terms(),
        delta_terms in terms(),
        over in prop::option::of((-3i64..=3, -3i64..=3)),
    ) {
        let body = integrated_text(&int(c), &roots, &eps_terms, &delta_terms);
        let mut f = func(&body, 1);
        if let Some((x, k)) = over {
            f = with_eps_override(f, x, k);
        }
        let set = find_candidates(&f, &int(-4), &int(4), 32).unwrap();
        // grid cells have width 1/4; a root is resolvable when no other root
        // shares its neighbourhood and its multiplicity is at most 3
        let isolated = |r: &Rational| {
            roots.iter().all(|s| s == r || (s - r).abs() > q(1, 2))
                && roots.iter().filter(|s| *s == r).count() <= 3
        };
        for r in roots.iter().filter(|r| **r >= int(-4) && **r <= int(4) && isolated(r)) {
            prop_assert!(set.points().contains(r), "root {} missing from {:?}", r, set.points());
        }
        for a in set.points() {
            let v = classify_1d(&f, &a, 8).unwrap();
            let o = st_oracle_classify(&f, &a, 8).unwrap();
            prop_assert_eq!(v.kind, o.kind);
            prop_assert_eq!(v.decisive_order, o.decisive_order);
            prop_assert_eq!(v.decisive_standard_part, o.decisive_standard_part);
        }
    }

    #[test]
    fn negation_swaps_extremum_kinds(
        c in prop_oneof![-5i64..=-1, 1i64..=5],
        roots in root_strategy(),
        eps_terms in terms(),
        pick in 0usize..5,
    ) {
        let f = func(&integrated_text(&int(c), &roots, &eps_terms, &[]), 1);
        let a = roots[pick % roots.len()].clone();
        let v = classify_1d(&f, &a, 8).unwrap();
        let w = classify_1d(&f.negated(), &a, 8).unwrap();
        prop_assert_eq!(w.kind, v.kind.mirrored());
        prop_assert_eq!(w.decisive_order, v.decisive_order);
    }

    #[test]
    fn infinitesimal_terms_keep_the_verdict(
        c in prop_oneof![-5i64..=-1, 1i64..=5],
        roots in root_strategy(),
        pick in 0usize..5,
        extra in prop::collection::vec((-6i64..=6, 0u32..=6, 1i64..=3, 0usize..2), 1..=3),
    ) {
        let base = integrated_text(&int(c), &roots, &[], &[]);
        let a = roots[pick % roots.len()].clone();
        let noise: Vec<String> = extra
            .iter()
            .map(|(k, j, p, g)| format!("({k})*{}^{p}*x1^{j}", ["eps", "delta"][*g]))
            .collect();
        let f = func(&base, 1);
        let g = func(&format!("{base} + {}", noise.join(" + ")), 1);
        let v = classify_1d(&f, &a, 8).unwrap();
        let w = classify_1d(&g, &a, 8).unwrap();
        prop_assert_eq!(v.kind, w.kind);
        prop_assert_eq!(v.decisive_order, w.decisive_order);
        let dv = v.decisive_value.unwrap();
        let dw = w.decisive_value.unwrap();
        prop_assert!(dv.approx_eq(&dw));
    }

    #[test]
    fn verdicts_agree_with_the_necessary_condition(
        coeffs in prop::collection::vec((-5i64..=5, -2i64..=2), 1..=6),
        a in -3i64..=3,
    ) {
        let body = coeffs
            .iter()
            .enumerate()
            .map(|(j, (k, e))| format!("({k} + {e}*eps)*x1^{j}"))
            .collect::<Vec<_>>()
            .join(" + ");
        let f = func(&body, 1);
        let v = classify_1d(&f, &int(a), 6).unwrap();
        let n = necessary_check(&f, &at(&[a])).unwrap();
        if v.kind.is_extremum() {
            prop_assert!(n.passed);
        }
        prop_assert_eq!(v.kind == VerdictKind::NecessaryFailed, !n.passed);
    }

    #[test]
    fn gradient_standard_parts_match_the_classical_partials(
        coeffs in prop::collection::vec((-4i64..=4, 0u32..=3, 0u32..=3, -2i64..=2), 1..=5),
        a in (-2i64..=2, -2i64..=2),
    ) {
        let body = coeffs
            .iter()
            .map(|(k, i, j, e)| format!("({k} + {e}*delta)*x1^{i}*x2^{j}"))
            .collect::<Vec<_>>()
            .join(" + ");
        let f = func(&body, 2);
        let v = gradient_test(&f, &at(&[a.0, a.1])).unwrap();
        for (var, t) in v.derivative_trace.iter().enumerate() {
            // classical partial of sum k x1^i x2^j
            let (x, y) = (int(a.0), int(a.1));
            let pow = |b: &Rational, n: u32| -> Rational {
                (0..n).fold(<Rational as One>::one(), |acc, _| acc * b)
            };
            let expected = coeffs.iter().fold(<Rational as Zero>::zero(), |acc, (k, i, j, _)| {
                let term = if var == 0 {
                    if *i == 0 { <Rational as Zero>::zero() } else { int(*k * i64::from(*i)) * pow(&x, i - 1) * pow(&y, *j) }
                } else if *j == 0 {
                    <Rational as Zero>::zero()
                } else {
                    int(*k * i64::from(*j)) * pow(&x, *i) * pow(&y, j - 1)
                };
                acc + term
            });
            prop_assert_eq!(t.value.standard_part().unwrap(), expected);
        }
    }
}
