//! `hyperopt`: classify candidate extrema of perturbed functions, evaluate
//! and differentiate them over the series field, and run theorem probes.
//!
//! Exit status is 0 on success, 1 when a probe ran and failed, and 2 on
//! usage, parse or evaluation errors.

mod run;
mod settings;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hyperopt::hyperreal::table::TableOp;
use hyperopt::hyperreal::Mode;

use settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "hyperopt", version, about = "Relaxed extremum tests over a computable hyperreal field")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Comma-separated generator names, largest first [default: eps,delta]
    #[arg(long, global = true)]
    pub generators: Option<String>,
    /// Coefficient field: rational or float [default: rational]
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub exp_bound: Option<i64>,
    #[arg(long, global = true)]
    pub max_terms: Option<usize>,
    /// Float mode: coefficients at or below this magnitude are dropped
    #[arg(long, global = true)]
    pub zero_tol: Option<f64>,
    /// Highest derivative order tried by `classify` [default: 8]
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    /// Probe threshold exponent `q` for `g1^q` [default: 8]
    #[arg(long, global = true)]
    pub delta_exponent: Option<String>,
    /// Probe sample offset as a constant expression; repeatable
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub offset: Vec<String>,
    /// TOML file whose keys mirror these options
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write the JSON report to this file
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of text
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FnArgs {
    /// Function body in x1..xn and the generators
    #[arg(long, conflicts_with = "fn_json")]
    pub expr: Option<String>,
    /// Function description as JSON: {body, arity, overrides}
    #[arg(long)]
    pub fn_json: Option<PathBuf>,
    /// Number of variables [default: the number of point coordinates, or 1]
    #[arg(long)]
    pub arity: Option<usize>,
    /// Point override `P=VALUE` with comma-separated standard coordinates;
    /// a VALUE starting with `+` is added to the body value; repeatable
    #[arg(long = "override", value_name = "P=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a standard point, or every candidate found on an interval
    Classify {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required_unless_present = "interval")]
        point: Vec<String>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, conflicts_with = "point")]
        interval: Option<Vec<String>>,
        /// Number of grid cells for the candidate search
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Also run the classical test on the standard part of f
        #[arg(long)]
        oracle: bool,
    },
    /// Evaluate f at a point
    Eval {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        point: Vec<String>,
        /// Print only the standard part
        #[arg(long)]
        st: bool,
    },
    /// Evaluate a partial derivative of f at a point
    Derive {
        #[command(flatten)]
        func: FnArgs,
        /// One-based variable index
        #[arg(long, default_value_t = 1)]
        var: usize,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        point: Vec<String>,
        #[arg(long)]
        st: bool,
    },
    /// Run a theorem probe and print its report
    Probe {
        #[command(subcommand)]
        probe: ProbeCommand,
    },
    /// Print the class-interaction table of an operation
    Table {
        #[arg(value_parser = parse_table_op, value_name = "add|mul|div")]
        op: TableOp,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProbeCommand {
    /// x ≈ a implies f(x) ≈ f(a)
    Scontinuity {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required_unless_present = "at_infinite")]
        point: Vec<String>,
        /// Use the infinite base point 1/g1 with offset g1
        #[arg(long, conflicts_with = "point")]
        at_infinite: bool,
    },
    /// Uniform increment identity in the monad of a standard point
    Increment {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        point: Vec<String>,
    },
    /// Mean value theorem between two nearstandard points
    Mvt {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: String,
        #[arg(long, allow_negative_numbers = true)]
        y: String,
    },
    /// Taylor remainder of order k at a standard point
    Taylor {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, num_args = 1, allow_negative_numbers = true, required = true)]
        point: Vec<String>,
        #[arg(long)]
        order: usize,
    },
    /// Chain rule for f∘g at a standard point
    Chain {
        #[command(flatten)]
        func: FnArgs,
        /// Inner function g in x1
        #[arg(long)]
        inner: String,
        #[arg(long, num_args = 1, allow_negative_numbers = true, required = true)]
        point: Vec<String>,
    },
}

fn parse_table_op(s: &str) -> Result<TableOp, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = Settings::resolve(&cli.global).and_then(|settings| match settings.mode {
        Mode::Rational => run::run::<hyperopt::hyperreal::Rational>(&cli.command, &settings),
        Mode::Float => run::run::<f64>(&cli.command, &settings),
    });
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let json = serde_json::to_string_pretty(&report.json).expect("reports serialize");
    if let Some(path) = &cli.global.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let mut stdout = std::io::stdout().lock();
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = if cli.global.json { writeln!(stdout, "{json}") } else { write!(stdout, "{}", report.text) };
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
