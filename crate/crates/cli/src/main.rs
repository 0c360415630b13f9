use clap::{Parser, Subcommand};
use parametric_cli::{csv::conventions_hash, exit, run, ConfigError, Output, RunConfig, RunError};
use parametric_core::conventions::CONVENTIONS;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "parametric", version, about = "Magnus-expansion analysis of a parametrically driven oscillator")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides output.path. Standard output when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and traces.
    #[arg(long)]
    workers: Option<usize>,
    /// Magnus order (1, 2 or 3).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    order: Option<u8>,
    /// Also run the reference integrator.
    #[arg(long, overrides_with = "no_oracle")]
    oracle: bool,
    /// Skip the reference integrator.
    #[arg(long)]
    no_oracle: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// One configuration: Magnus and oracle coefficients, actions, checks.
    Run(Common),
    /// Parameter sweep, one CSV row per point.
    Sweep(Common),
    /// Equation-of-motion source on a time grid.
    Eom(Common),
    /// Parse and check a configuration, printing its normalized form.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the sign and branch conventions sheet.
    Conventions,
}

fn load(common: &Common) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(k) = common.order {
        config.order = k as usize;
    }
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(ConfigError::Invalid("--workers must be at least 1".into()));
        }
        config.workers = n;
    }
    if common.oracle {
        config.oracle = true;
    }
    if common.no_oracle {
        config.oracle = false;
    }
    if let Some(out) = &common.out {
        config.output = Some(out.clone());
    }
    Ok(config)
}

fn execute(common: &Common, verb: fn(&RunConfig) -> Result<Output, RunError>) -> i32 {
    let config = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return exit::CONFIG;
        }
    };
    let output = match verb(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("numerical failure: {e}");
            return exit::NUMERICAL;
        }
    };
    match &config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &output.csv) {
                eprintln!("cannot write {}: {e}", path.display());
                return exit::NUMERICAL;
            }
        }
        None => emit(&output.csv),
    }
    eprint!("{}", output.summary);
    if output.failed_rows > 0 {
        exit::PARTIAL
    } else {
        exit::SUCCESS
    }
}

/// Write to standard output; a closed pipe downstream is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.verb {
        Verb::Run(c) => execute(c, run::run_single),
        Verb::Sweep(c) => execute(c, run::run_sweep),
        Verb::Eom(c) => execute(c, run::emit_eom_trace),
        Verb::ValidateConfig { config } => match RunConfig::load(config) {
            Ok(c) => {
                emit(&format!("{c}\n"));
                exit::SUCCESS
            }
            Err(e) => {
                eprintln!("config error: {e}");
                exit::CONFIG
            }
        },
        Verb::Conventions => {
            emit(&format!("# sha256:{}\n{CONVENTIONS}", conventions_hash()));
            exit::SUCCESS
        }
    };
    ExitCode::from(code as u8)
}
