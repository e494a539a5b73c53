//! spinpulse: exact propagators and Swap-probability curves for driven
//! two- and four-level spin systems.

mod config;
mod run;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use run::RunError;
use spinpulse::validate::ValidateOptions;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION_FAILURE: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;
const EXIT_NUMERICAL_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "spinpulse",
    about = "Exact evolution operators and Swap probabilities for driven spin systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the external field of an angle trajectory (CSV: t, angles, F).
    Synthesize(RunArgs),
    /// Evolution operator entries over a time grid (CSV, re/im pairs).
    Evolve(RunArgs),
    /// Swap probability over a time grid (CSV: t_ns, P).
    SwapProb(RunArgs),
    /// Swap probability over a parameter grid (CSV: variable, P).
    Sweep(RunArgs),
    /// Run the self-check suite and exit nonzero on any failure.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a flat key = value config file.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. --set a_over_omega=2 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV path (overrides the config's `out`); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Optional config file (reads `tolerance`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Threshold for the closed-form vs oracle checks.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Harness hook: perturb the half-angle parameters to demonstrate that
    /// the unitarity checks catch regressions.
    #[arg(long, hide = true, default_value_t = 0.0)]
    inject_euler_perturbation: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG_ERROR)
        }
        Err(RunError::Numerical(e)) => {
            eprintln!("numerical error: {e}");
            ExitCode::from(EXIT_NUMERICAL_ERROR)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, RunError> {
    match cli.command {
        Command::Synthesize(args) => emit(&args, run::run_synthesize),
        Command::Evolve(args) => emit(&args, run::run_evolve),
        Command::SwapProb(args) => emit(&args, run::run_swap_prob),
        Command::Sweep(args) => emit(&args, run::run_sweep),
        Command::Validate(args) => validate(args),
    }
}

fn emit(args: &RunArgs, f: impl Fn(&RunConfig) -> Result<String, RunError>) -> Result<u8, RunError> {
    let mut cfg = RunConfig::from_file(&args.config)?;
    cfg.apply_overrides(&args.set)?;
    let csv = f(&cfg)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_path().map(PathBuf::from));
    match out {
        Some(path) => std::fs::write(&path, csv).map_err(|e| {
            RunError::Config(config::ConfigError(format!(
                "cannot write {}: {e}",
                path.display()
            )))
        })?,
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

fn validate(args: ValidateArgs) -> Result<u8, RunError> {
    let mut tolerance = 1e-6;
    if let Some(path) = &args.config {
        let mut cfg = RunConfig::from_file(path)?;
        cfg.apply_overrides(&args.set)?;
        tolerance = cfg.get_f64_or("tolerance", tolerance)?;
    }
    if let Some(t) = args.tolerance {
        tolerance = t;
    }
    let report = run::run_validate(&ValidateOptions {
        oracle_tolerance: tolerance,
        euler_perturbation: args.inject_euler_perturbation,
    });
    print!("{}", report.render());
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_VALIDATION_FAILURE })
}
