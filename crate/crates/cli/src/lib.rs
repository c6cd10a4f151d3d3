//! Experiment runner for the bergman-core harnesses.
//!
//! Each `verify-*` subcommand builds an [`ExperimentConfig`] from defaults,
//! an optional `--config` file, `--set key=value` pairs and dedicated flags
//! (in increasing precedence), runs the harness and writes a CSV whose
//! header records the config hash, seed, quadrature orders, doubled-order
//! drift and verdict.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{execute, Outcome, Row};
pub use config::{Command, ConfigError, ExperimentConfig};

/// Exit code of a run whose verdict passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code on configuration, numerical or i/o errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit code of a run whose verdict failed.
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] bergman_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// CSV text and verdict of a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub csv: String,
    pub passed: bool,
}

/// Runs the experiment (twice at doubled orders when drift is enabled) and
/// renders the CSV without writing it.
pub fn render(cfg: &ExperimentConfig) -> Result<Rendered, CliError> {
    let opts = cfg.quad_options();
    let outcome = execute(cfg, &opts)?;
    let drift = if cfg.drift {
        let doubled = execute(cfg, &opts.doubled())?;
        Some(output::drift(&outcome.rows, &doubled.rows))
    } else {
        None
    };
    Ok(Rendered {
        csv: output::render(cfg, &outcome, drift),
        passed: outcome.passed,
    })
}

/// Runs `cfg`, writes the CSV to `cfg.out` (stdout when unset) and returns
/// the exit code.
pub fn run(cfg: &ExperimentConfig) -> i32 {
    match run_inner(cfg) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run_inner(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let r = render(cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &r.csv).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{}", r.csv),
    }
    eprintln!("{}: verdict {}", cfg.command, if r.passed { "pass" } else { "fail" });
    Ok(r.passed)
}

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Numerical checks of weighted Bergman-space estimates")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Kernel integrals against `w(|λ|)(1-|λ|)^{-m}` over a λ grid.
    #[command(name = "verify-prop12")]
    Prop12(RunArgs),
    /// `‖B'‖^p` against the zero sum, over partial products.
    #[command(name = "verify-main1")]
    Main1(RunArgs),
    /// Weighted circle supremum against the zero sums.
    #[command(name = "verify-mashregi")]
    Mashregi(RunArgs),
    /// Averaged counting function by two paths, and its bounds.
    #[command(name = "verify-inner")]
    Inner(RunArgs),
    /// Comparison of derivative norms under two exponents.
    #[command(name = "verify-cor24")]
    Cor24(RunArgs),
    /// Higher-derivative norms: random polynomials or zero sums.
    #[command(name = "verify-higher")]
    Higher(RunArgs),
    /// Interpolation on separated sequences with random targets.
    #[command(name = "verify-interp")]
    Interp(RunArgs),
    /// Quotient sums, the F-property or residue identities.
    #[command(name = "verify-duality")]
    Duality(RunArgs),
    /// Model-space derivatives against the zero sums.
    #[command(name = "verify-cohn")]
    Cohn(RunArgs),
    /// `‖(B^n)'‖_1 / n` over powers of a product.
    #[command(name = "verify-power-growth")]
    PowerGrowth(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output CSV (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, value_name = "N")]
    rad_order: Option<String>,
    #[arg(long, value_name = "N")]
    ang_order: Option<String>,
    /// Clustering exponent of the tensor rules.
    #[arg(long, value_name = "K")]
    kappa: Option<String>,
    /// `as-printed` or `harmonized`.
    #[arg(long, value_name = "VARIANT")]
    gate_variant: Option<String>,
    /// Weight spec, e.g. `standard:alpha=-0.5`.
    #[arg(long, allow_hyphen_values = true)]
    weight: Option<String>,
    /// Shorthand for `--weight standard:alpha=A`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Sequence spec, e.g. `exp:sigma=0.5,n=10`.
    #[arg(long)]
    sequence: Option<String>,
    /// Sets `sigma` of an `exp`/`rotexp` sequence.
    #[arg(long)]
    sigma: Option<String>,
    /// Sets the length `n` of an `exp`/`rotexp` sequence.
    #[arg(long = "n", value_name = "N")]
    length: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Comma-separated sweep lengths.
    #[arg(long)]
    ns: Option<String>,
    /// Any config key, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    set: Vec<String>,
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::Prop12(a) => (Command::Prop12, a),
            Sub::Main1(a) => (Command::Main1, a),
            Sub::Mashregi(a) => (Command::Mashregi, a),
            Sub::Inner(a) => (Command::Inner, a),
            Sub::Cor24(a) => (Command::Cor24, a),
            Sub::Higher(a) => (Command::Higher, a),
            Sub::Interp(a) => (Command::Interp, a),
            Sub::Duality(a) => (Command::Duality, a),
            Sub::Cohn(a) => (Command::Cohn, a),
            Sub::PowerGrowth(a) => (Command::PowerGrowth, a),
        }
    }
}

fn build_config(command: Command, args: RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::new(command);
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError {
            at: "--set".into(),
            msg: format!("expected KEY=VALUE, got \"{kv}\""),
        })?;
        cfg.set(k.trim(), v).map_err(|msg| ConfigError { at: "--set".into(), msg })?;
    }
    let flags = [
        ("weight", &args.weight),
        ("alpha", &args.alpha),
        ("sequence", &args.sequence),
        ("sigma", &args.sigma),
        ("length", &args.length),
        ("p", &args.p),
        ("eps", &args.eps),
        ("gamma", &args.gamma),
        ("trials", &args.trials),
        ("ns", &args.ns),
        ("seed", &args.seed),
        ("rad_order", &args.rad_order),
        ("ang_order", &args.ang_order),
        ("kappa", &args.kappa),
        ("gate_variant", &args.gate_variant),
        ("out", &args.out),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v).map_err(|msg| ConfigError {
                at: format!("--{}", if key == "length" { "n".into() } else { key.replace('_', "-") }),
                msg,
            })?;
        }
    }
    Ok(cfg)
}

/// Parses command-line arguments into a config.
pub fn parse_args<I, T>(args: I) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| ConfigError {
        at: "arguments".into(),
        msg: e.to_string(),
    })?;
    let (command, args) = cli.command.split();
    Ok(build_config(command, args)?)
}

/// Entry point of the binary: parse, run, exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    match Cli::try_parse_from(&args) {
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_PASS;
        }
        Err(e) => {
            let _ = e.print();
            return EXIT_ERROR;
        }
        Ok(_) => {}
    }
    match parse_args(&args) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
