//! `mis`: audits, shock analysis and simulations for the bulk-viscous
//! relativistic fluid.
//!
//! Exit status: 0 success, 1 a checked condition or property failed,
//! 2 invalid input or a domain error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "mis", version, about = "Bulk-viscous relativistic fluid: audits, shocks and 1D runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Args)]
struct Shared {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Seed for random state sampling (ChaCha8).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Number of sampled states.
    #[arg(long, global = true, value_name = "K")]
    samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Audit concavity and the two causality conditions over sampled states.
    CheckEos,
    /// Characteristic speeds and definiteness margins over sampled states.
    Speeds,
    /// Hugoniot loci, Lax classification and shock entropy production.
    Hugoniot,
    /// Run the finite-volume solver and write snapshots.
    Simulate {
        /// Enforce the conservation and entropy audits.
        #[arg(long)]
        audit: bool,
    },
    /// Run the solver and audit total entropy; with --audit also the
    /// pointwise entropy balance under grid refinement.
    EntropyAudit {
        #[arg(long)]
        audit: bool,
    },
}

pub enum CliError {
    /// Exit status 2.
    Input(String),
    /// Exit status 1.
    Failed(String),
}

impl From<mis_core::Error> for CliError {
    fn from(e: mis_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub samples: Option<usize>,
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        None => RunConfig::parse("").map_err(CliError::Input),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(cli.shared.config.as_ref()).and_then(|config| {
        let ctx = Context { config, out: cli.shared.out, seed: cli.shared.seed, samples: cli.shared.samples };
        match cli.command {
            Command::CheckEos => commands::check_eos(&ctx),
            Command::Speeds => commands::speeds(&ctx),
            Command::Hugoniot => commands::hugoniot(&ctx),
            Command::Simulate { audit } => commands::simulate(&ctx, audit),
            Command::EntropyAudit { audit } => commands::entropy_audit(&ctx, audit),
        }
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
