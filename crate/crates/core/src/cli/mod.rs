//! The `cdols` command-line interface.
//!
//! Tables and curves are written as CSV, single-signal results as JSON.
//! Each output file gets a `<file>.manifest.json` sidecar. Logs go to
//! stderr. `CDOLS_THREADS` caps the worker thread count.

mod commands;
pub mod gridspec;
pub mod manifest;

use crate::classify::Method;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser, Serialize)]
#[command(name = "cdols", version, about = "Greedy sparse recovery and class-dependent sparse-representation classification")]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Recover a sparse representation of one signal.
    Pursue(PursueArgs),
    /// Classify test samples against a training set.
    Classify(ClassifyArgs),
    /// Cross-validate sparsity (and RBF gamma) on a training set.
    Cv(CvArgs),
    /// Accuracy table over training sizes and repeated random splits.
    Bench(BenchArgs),
    /// Average per-iteration residuals of OMP, OLS and COLS within one class.
    ResidualCurve(ResidualCurveArgs),
    /// Accuracy as a function of sparsity.
    Sweep(SweepArgs),
    /// Write a synthetic union-of-subspaces dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverName {
    Omp,
    Ols,
    Cols,
    Exhaustive,
}

#[derive(Debug, Args, Serialize)]
pub struct PursueArgs {
    /// Dictionary CSV, one atom per row.
    #[arg(long, required_unless_present = "fig1")]
    pub dict: Option<PathBuf>,
    /// Signal CSV with a single row.
    #[arg(long, required_unless_present = "fig1")]
    pub signal: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "fig1")]
    pub method: Option<SolverName>,
    #[arg(long, required_unless_present = "fig1")]
    pub sparsity: Option<usize>,
    /// Run every solver at sparsity 2 on the built-in three-atom example.
    #[arg(long, conflicts_with_all = ["dict", "signal", "method", "sparsity"])]
    pub fig1: bool,
    /// JSON output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Linear,
    Rbf,
    Polynomial,
}

/// Kernel flags; used only by kernel methods.
#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    /// Kernel for ksrc and kcd_* methods [default: rbf].
    #[arg(long, value_enum)]
    pub kernel: Option<KernelFamily>,
    /// RBF width in exp(-gamma ||u - v||^2).
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Polynomial degree.
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    /// Polynomial offset.
    #[arg(long, default_value_t = 1.0)]
    pub coef0: f64,
}

impl KernelArgs {
    pub fn spec(&self) -> Result<KernelSpec> {
        match self.kernel.unwrap_or(KernelFamily::Rbf) {
            KernelFamily::Linear => Ok(KernelSpec::Linear),
            KernelFamily::Rbf => KernelSpec::rbf(self.gamma),
            KernelFamily::Polynomial => KernelSpec::polynomial(self.degree, self.coef0),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// Labeled training CSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Test CSV; a final `label` column is optional.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    #[arg(long)]
    pub sparsity: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Per-sample CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Grid spec such as "S=1..8;gamma=0.1,1,10;folds=5".
    #[arg(long, default_value = gridspec::DEFAULT_GRID)]
    pub grid: String,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-cell CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, required = true)]
    pub methods: Vec<Method>,
    #[arg(long, default_value = "10,30,50")]
    pub train_sizes: String,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid spec for per-repeat cross-validation, or "none" to use
    /// --sparsity and --gamma as given.
    #[arg(long, default_value = gridspec::DEFAULT_GRID)]
    pub cv: String,
    /// Sparsity when cross-validation is off.
    #[arg(long, default_value_t = 5)]
    pub sparsity: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Table CSV; stdout when absent. Selected parameters go to
    /// `<out>.params.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ResidualCurveArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Class name, or class index when no name matches.
    #[arg(long = "class")]
    pub class: String,
    #[arg(long, default_value_t = 100)]
    pub repeats: usize,
    #[arg(long)]
    pub sparsity_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, required = true)]
    pub methods: Vec<Method>,
    /// Sparsity list such as "1..30".
    #[arg(long, default_value = "1..30")]
    pub sparsity: String,
    #[arg(long, default_value_t = 30)]
    pub train_size: usize,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 4)]
    pub subspace_dim: usize,
    #[arg(long, default_value_t = 50)]
    pub ambient_dim: usize,
    #[arg(long, default_value_t = 60)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.trim().parse::<Method>().map_err(|e| e.to_string())
}

pub use commands::Context;

pub fn run(cli: &Cli, ctx: &Context) -> Result<()> {
    match &cli.command {
        Command::Pursue(a) => commands::pursue(a, ctx),
        Command::Classify(a) => commands::classify(a, ctx),
        Command::Cv(a) => commands::cv(a, ctx),
        Command::Bench(a) => commands::bench(a, ctx),
        Command::ResidualCurve(a) => commands::residual_curve(a, ctx),
        Command::Sweep(a) => commands::sweep(a, ctx),
        Command::Synth(a) => commands::synth(a, ctx),
    }
}

/// Ids of subcommand flags that took their default value.
fn defaulted_flags(matches: &ArgMatches) -> Vec<String> {
    let Some((_, sub)) = matches.subcommand() else {
        return Vec::new();
    };
    let mut ids: Vec<String> = sub
        .ids()
        .filter(|id| sub.value_source(id.as_str()) == Some(ValueSource::DefaultValue))
        .map(|id| id.to_string())
        .collect();
    ids.sort();
    ids
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("CDOLS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config(format!("CDOLS_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::config(e.to_string()))
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Entry point for the binary: parses arguments, runs the command and maps
/// failures to a one-line `error: ...` on stderr.
pub fn main() -> ExitCode {
    let parsed = Cli::command()
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m).map(|cli| (cli, m)));
    let (cli, matches) = match parsed {
        Ok(p) => p,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(2);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    let ctx = Context {
        defaults: defaulted_flags(&matches),
    };
    if let Err(e) = configure_threads().and_then(|()| run(&cli, &ctx)) {
        eprintln!("error: {}", one_line(&e.to_string()));
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
