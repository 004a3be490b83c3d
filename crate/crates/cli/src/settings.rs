use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num_rational::Rational64;
use serde::Deserialize;

use hyperopt::extremum::DEFAULT_MAX_ORDER;
use hyperopt::hyperreal::{GeneratorRegistry, Mode, SeriesPolicy};

use crate::GlobalArgs;

/// Keys accepted in a `--config` TOML file. Every key is optional and is
/// overridden by the matching command-line flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub generators: Option<Vec<String>>,
    pub mode: Option<String>,
    pub exp_bound: Option<i64>,
    pub max_terms: Option<usize>,
    pub zero_tol: Option<f64>,
    pub max_order: Option<usize>,
    pub delta_exponent: Option<String>,
    pub sample_offsets: Option<Vec<String>>,
    pub max_taylor_order: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Effective settings after merging defaults, the config file and flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub registry: Arc<GeneratorRegistry>,
    pub mode: Mode,
    pub max_order: usize,
    pub delta_exponent: Option<Rational64>,
    /// Constant expressions; parsed against the registry once it exists.
    pub sample_offsets: Option<Vec<String>>,
    pub max_taylor_order: Option<usize>,
}

pub fn parse_exponent(text: &str) -> Result<Rational64> {
    let t = text.trim();
    let r = match t.split_once('/') {
        Some((p, q)) => {
            let (p, q): (i64, i64) = (p.trim().parse()?, q.trim().parse()?);
            if q == 0 {
                bail!("zero denominator in `{t}`");
            }
            Rational64::new(p, q)
        }
        None => Rational64::from_integer(t.parse()?),
    };
    Ok(r)
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let defaults = SeriesPolicy::default();
        let names: Vec<String> = match (&args.generators, file.generators) {
            (Some(g), _) => g.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            (None, Some(g)) => g,
            (None, None) => vec!["eps".into(), "delta".into()],
        };
        let policy = SeriesPolicy {
            exp_bound: args.exp_bound.or(file.exp_bound).unwrap_or(defaults.exp_bound),
            max_terms: args.max_terms.or(file.max_terms).unwrap_or(defaults.max_terms),
            zero_tol: args.zero_tol.or(file.zero_tol).unwrap_or(defaults.zero_tol),
        };
        let registry = GeneratorRegistry::with_policy(&names, policy)?;
        let mode = match args.mode.as_deref().or(file.mode.as_deref()) {
            Some(m) => m.parse().map_err(anyhow::Error::msg)?,
            None => Mode::Rational,
        };
        let max_order = args.max_order.or(file.max_order).unwrap_or(DEFAULT_MAX_ORDER);
        let delta_exponent = match args.delta_exponent.as_deref().or(file.delta_exponent.as_deref()) {
            Some(t) => Some(parse_exponent(t).with_context(|| format!("bad delta exponent `{t}`"))?),
            None => None,
        };
        let sample_offsets = if args.offset.is_empty() { file.sample_offsets } else { Some(args.offset.clone()) };
        Ok(Settings {
            registry,
            mode,
            max_order,
            delta_exponent,
            sample_offsets,
            max_taylor_order: file.max_taylor_order,
        })
    }
}
