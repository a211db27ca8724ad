// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::commands::Ctx;
use crate::config::RunConfig;
use crate::error::Result;
use crate::output::Output;

/// Simulations of mobile geometric scale-free random graphs.
///
/// Settings come from a TOML config (every key optional); flags override it.
#[derive(Debug, Parser)]
#[command(name = "mobgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Replicas per experiment; overrides the config.
    #[arg(long, global = true)]
    replicas: Option<usize>,

    /// Worker threads. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Output directory.
    #[arg(long, global = true, env = "MOBGRAPH_OUT", default_value = "mobgraph-out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample marked Poisson clouds, one JSONL file per replica.
    Sample,
    /// Component statistics over the observation grid.
    Evolve,
    /// Broadcast time on tori of growing volume.
    BroadcastScaling,
    /// Survival curve of the percolation-time proxy with tail fits.
    PercTail,
    /// Density, spread-subgraph, connector and membership reports.
    Diagnose,
    /// Broadcast time as the observation grid is refined.
    Convergence,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.replicas {
        cfg.replicas = r;
    }
    if cli.workers == 0 {
        return Err(error::CliError::Config("workers must be positive".into()));
    }
    cfg.validate()?;
    let out = Output::new(&cli.out, &cfg)?;
    log::info!("config sha256 {}", cfg.hash());
    let ctx = Ctx::new(cfg, out, cli.workers)?;
    match cli.command {
        Command::Sample => commands::sample::run(&ctx),
        Command::Evolve => commands::evolve::run(&ctx),
        Command::BroadcastScaling => commands::broadcast::run(&ctx),
        Command::PercTail => commands::perc::run(&ctx),
        Command::Diagnose => commands::diagnose::run(&ctx),
        Command::Convergence => commands::convergence::run(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let help = format!(
        "Exit codes: 0 success, 2 invalid config or input, 3 resource limit.\n\nDefault config:\n\n{}",
        RunConfig::default().to_toml()
    );
    let matches = Cli::command().after_long_help(help).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
