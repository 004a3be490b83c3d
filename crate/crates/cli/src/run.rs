use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use num_rational::Rational64;
use serde_json::{json, Value};

use hyperopt::expr::{FnJson, PerturbedFn, Point};
use hyperopt::extremum::{
    classify_1d, find_candidates, gradient_test, st_hessian_oracle, st_oracle_classify, Verdict,
};
use hyperopt::hyperreal::table::{interaction_table, TableClass};
use hyperopt::hyperreal::{parse_decimal, Coeff, GeneratorRegistry, Hyperreal, Rational};
use hyperopt::mucalc::{
    chain_rule_check, mu_increment_check, mvt_check, s_continuity_probe, taylor_check, Offset, ProbeConfig,
    ProbeReport,
};

use crate::settings::Settings;
use crate::{Command, FnArgs, ProbeCommand};

pub struct Report {
    pub text: String,
    pub json: Value,
    pub passed: bool,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { text, json, passed: true }
    }
}

pub fn run<C: Coeff>(command: &Command, s: &Settings) -> Result<Report> {
    let reg = &s.registry;
    match command {
        Command::Classify { func, point, interval, grid, oracle } => match interval {
            Some(bounds) => classify_interval::<C>(s, func, bounds, *grid, *oracle),
            None => {
                let f = load_fn::<C>(func, Some(point.len()), reg)?;
                let a = standard_coords::<C>(point, reg)?;
                classify_point(s, &f, &a, *oracle)
            }
        },
        Command::Eval { func, point, st } => {
            let f = load_fn::<C>(func, Some(point.len()), reg)?;
            let p = Point::new(constants::<C>(point, reg)?);
            value_report(&f.evaluate(&p)?, *st)
        }
        Command::Derive { func, var, order, point, st } => {
            let f = load_fn::<C>(func, Some(point.len()), reg)?;
            if *var == 0 || *var > f.arity() {
                bail!("--var {var} is outside 1..={}", f.arity());
            }
            let p = Point::new(constants::<C>(point, reg)?);
            value_report(&f.nth_derivative_at(var - 1, *order, &p)?, *st)
        }
        Command::Probe { probe } => run_probe::<C>(s, probe),
        Command::Table { op } => {
            if reg.is_empty() {
                bail!("interaction tables need at least one generator");
            }
            let table = interaction_table::<C>(reg, *op);
            let mut text = table.to_string();
            for row in TableClass::ALL {
                for col in TableClass::ALL {
                    let cell = table.cell(row, col);
                    if cell.class.is_none() {
                        let _ = writeln!(text, "? at ({}, {}):", row.symbol(), col.symbol());
                        for w in &cell.witnesses {
                            let _ = writeln!(text, "  {} {} = {} [{}]", w.lhs, w.rhs, w.result, w.class);
                        }
                    }
                }
            }
            Ok(Report::ok(text, serde_json::to_value(&table)?))
        }
    }
}

fn constant<C: Coeff>(text: &str, reg: &Arc<GeneratorRegistry>) -> Result<Hyperreal<C>> {
    let f = PerturbedFn::<C>::parse(text, 0, reg).with_context(|| format!("in `{text}`"))?;
    Ok(f.evaluate(&Point::new(Vec::new()))?)
}

fn constants<C: Coeff>(texts: &[String], reg: &Arc<GeneratorRegistry>) -> Result<Vec<Hyperreal<C>>> {
    texts.iter().map(|t| constant(t, reg)).collect()
}

fn standard_coords<C: Coeff>(texts: &[String], reg: &Arc<GeneratorRegistry>) -> Result<Vec<C>> {
    texts
        .iter()
        .map(|t| constant::<C>(t, reg)?.as_standard().ok_or_else(|| anyhow!("coordinate `{t}` is not standard")))
        .collect()
}

fn rational(text: &str) -> Result<Rational> {
    parse_decimal(text.trim()).ok_or_else(|| anyhow!("`{text}` is not a rational number"))
}

fn load_fn<C: Coeff>(args: &FnArgs, coords: Option<usize>, reg: &Arc<GeneratorRegistry>) -> Result<PerturbedFn<C>> {
    let mut f = match (&args.expr, &args.fn_json) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let json: FnJson = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(n) = args.arity {
                if n != json.arity {
                    bail!("--arity {n} disagrees with the function file's arity {}", json.arity);
                }
            }
            PerturbedFn::from_json(&json, reg)?
        }
        (Some(expr), None) => {
            let arity = args.arity.or(coords.filter(|&n| n > 0)).unwrap_or(1);
            PerturbedFn::parse(expr, arity, reg)?
        }
        (None, None) => bail!("either --expr or --fn-json is required"),
    };
    for spec in &args.overrides {
        let (p, v) = spec.split_once('=').ok_or_else(|| anyhow!("override `{spec}` is not of the form P=VALUE"))?;
        let point = p.split(',').map(rational).collect::<Result<Vec<_>>>()?;
        let value = match v.trim().strip_prefix('+') {
            Some(bump) => {
                let at = Point::standard(reg, &point);
                if at.len() != f.arity() {
                    bail!("override `{spec}` has {} coordinates, expected {}", at.len(), f.arity());
                }
                &f.body().eval(reg, at.coords())? + &constant::<C>(bump, reg)?
            }
            None => constant(v, reg)?,
        };
        f = f.with_override(point, value)?;
    }
    Ok(f)
}

fn value_report<C: Coeff>(v: &Hyperreal<C>, st_only: bool) -> Result<Report> {
    if st_only {
        let st = v.standard_part()?.to_text();
        return Ok(Report::ok(format!("{st}\n"), json!({ "standard_part": st })));
    }
    let class = v.magnitude_class();
    let st = v.standard_part().ok().map(|c| c.to_text());
    let mut text = format!("{v}\nclass: {class}\n");
    if let Some(st) = &st {
        let _ = writeln!(text, "standard part: {st}");
    }
    if v.is_truncated() {
        text.push_str("note: truncated series\n");
    }
    let json = json!({
        "value": v.to_string(),
        "class": class,
        "standard_part": st,
        "truncated": v.is_truncated(),
        "terms": v.to_json_terms(),
    });
    Ok(Report::ok(text, json))
}

fn verdict_text<C: Coeff>(v: &Verdict<C>) -> String {
    let mut text = format!("{v}\n");
    for t in &v.derivative_trace {
        let name = match t.var {
            Some(i) => format!("df/dx{}", i + 1),
            None => format!("f^({})", t.k),
        };
        let _ = writeln!(text, "  {name} = {} [{}]", t.value, t.class);
    }
    text
}

fn classify_point<C: Coeff>(s: &Settings, f: &PerturbedFn<C>, a: &[C], oracle: bool) -> Result<Report> {
    if a.len() != f.arity() {
        bail!("expected {} coordinates, got {}", f.arity(), a.len());
    }
    let at = Point::from_coeffs(&s.registry, a);
    let verdict = if f.arity() == 1 { classify_1d(f, &a[0], s.max_order)? } else { gradient_test(f, &at)? };
    let mut text = format!("at {at}: {}", verdict_text(&verdict));
    let mut json = json!({ "point": point_json(a), "verdict": verdict.to_json() });
    if oracle {
        if f.arity() == 1 {
            let o = st_oracle_classify(f, &a[0], s.max_order)?;
            let _ = write!(text, "standard-part oracle: {}", verdict_text(&o));
            json["oracle"] = serde_json::to_value(o.to_json())?;
        } else {
            let h = st_hessian_oracle(f, a)?;
            let _ = writeln!(text, "Hessian of st(f) (oracle extension): {h:?}");
            json["hessian_oracle"] = serde_json::to_value(h)?;
        }
    }
    Ok(Report::ok(text, json))
}

fn point_json<C: Coeff>(a: &[C]) -> Value {
    Value::Array(a.iter().map(|c| Value::String(c.to_text())).collect())
}

fn classify_interval<C: Coeff>(
    s: &Settings,
    func: &FnArgs,
    bounds: &[String],
    grid: usize,
    oracle: bool,
) -> Result<Report> {
    let f = load_fn::<C>(func, None, &s.registry)?;
    let (lo, hi) = (rational(&bounds[0])?, rational(&bounds[1])?);
    let set = find_candidates(&f, &lo, &hi, grid)?;
    let mut text = format!(
        "{} candidate(s) on [{}, {}] with {} grid cells\n",
        set.candidates.len(),
        bounds[0].trim(),
        bounds[1].trim(),
        grid
    );
    let mut entries = Vec::new();
    for (c, cj) in set.candidates.iter().zip(set.to_json().candidates) {
        let verdict = classify_1d(&f, &c.point, s.max_order)?;
        let _ = write!(text, "x = {}: {}", c.point.to_text(), verdict_text(&verdict));
        let mut entry = serde_json::to_value(&cj)?;
        entry["verdict"] = serde_json::to_value(verdict.to_json())?;
        if oracle {
            let o = st_oracle_classify(&f, &c.point, s.max_order)?;
            let _ = writeln!(text, "  standard-part oracle: {o}");
            entry["oracle"] = serde_json::to_value(o.to_json())?;
        }
        entries.push(entry);
    }
    let mut json = serde_json::to_value(set.to_json())?;
    json["candidates"] = Value::Array(entries);
    Ok(Report::ok(text, json))
}

fn probe_config<C: Coeff>(s: &Settings, default_offsets: Option<Vec<Offset>>) -> Result<ProbeConfig> {
    let reg = &s.registry;
    let mut cfg = ProbeConfig::standard(reg);
    if let Some(q) = s.delta_exponent {
        cfg.delta_exponent = q;
    }
    match &s.sample_offsets {
        Some(texts) => {
            cfg.sample_offsets = texts
                .iter()
                .map(|t| Ok(Offset(constant::<C>(t, reg)?.to_json_terms())))
                .collect::<Result<Vec<_>>>()?;
        }
        None => {
            if let Some(o) = default_offsets {
                cfg.sample_offsets = o;
            }
        }
    }
    if let Some(k) = s.max_taylor_order {
        cfg.max_taylor_order = k;
    }
    Ok(cfg)
}

fn probe_report<C: Coeff>(r: ProbeReport<C>) -> Result<Report> {
    let json = serde_json::to_value(r.to_json())?;
    let text = format!("{}\n", serde_json::to_string_pretty(&json)?);
    Ok(Report { text, json, passed: r.passed })
}

fn run_probe<C: Coeff>(s: &Settings, probe: &ProbeCommand) -> Result<Report> {
    let reg = &s.registry;
    let report = match probe {
        ProbeCommand::Scontinuity { func, point, at_infinite } => {
            if *at_infinite {
                if reg.is_empty() {
                    bail!("--at-infinite needs at least one generator");
                }
                let f = load_fn::<C>(func, None, reg)?;
                let omega = Hyperreal::generator(reg, 0, Rational64::from_integer(-1))?;
                let mut exps = vec![Rational64::from_integer(0); reg.len()];
                exps[0] = Rational64::from_integer(1);
                let cfg = probe_config::<C>(s, Some(vec![Offset::monomial(1, &exps)]))?;
                let a = Point::new(vec![omega; f.arity()]);
                s_continuity_probe(&f, &a, &cfg)?
            } else {
                let f = load_fn::<C>(func, Some(point.len()), reg)?;
                let a = Point::new(constants::<C>(point, reg)?);
                s_continuity_probe(&f, &a, &probe_config::<C>(s, None)?)?
            }
        }
        ProbeCommand::Increment { func, point } => {
            let f = load_fn::<C>(func, Some(point.len()), reg)?;
            let a = Point::from_coeffs(reg, &standard_coords::<C>(point, reg)?);
            mu_increment_check(&f, &a, &probe_config::<C>(s, None)?)?
        }
        ProbeCommand::Mvt { func, x, y } => {
            let f = load_fn::<C>(func, Some(1), reg)?;
            mvt_check(&f, &constant(x, reg)?, &constant(y, reg)?, &probe_config::<C>(s, None)?)?
        }
        ProbeCommand::Taylor { func, point, order } => {
            let f = load_fn::<C>(func, Some(1), reg)?;
            let a = Point::from_coeffs(reg, &standard_coords::<C>(point, reg)?);
            taylor_check(&f, &a, *order, &probe_config::<C>(s, None)?)?
        }
        ProbeCommand::Chain { func, inner, point } => {
            let f = load_fn::<C>(func, Some(1), reg)?;
            let g = PerturbedFn::<C>::parse(inner, 1, reg).with_context(|| format!("in `{inner}`"))?;
            let a = standard_coords::<C>(point, reg)?;
            chain_rule_check(&f, &g, &a[0], &probe_config::<C>(s, None)?)?
        }
    };
    probe_report(report)
}
