//! `annulus`: runs, checks and continuation studies for radially symmetric
//! heat-conducting flow on annuli.
//!
//! Exit codes: 0 ok, 2 configuration, 3 solver failure, 4 invariant failure, 5 i/o.

// comparisons are written negated so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod continuation;
mod failure;
mod mms;
mod output;
mod report;
mod run;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use crate::config::{parse_config, Subcommand};
use crate::failure::{Class, Classify, Outcome};

#[derive(Parser, Debug)]
#[command(name = "annulus", version, about = "Compressible heat-conducting flow on annuli")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Output directory.
    #[arg(long, global = true, env = "ANNULUS_OUT", default_value = "annulus-out")]
    out: PathBuf,
    /// Worker threads for concurrent runs and checks (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of the randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record wall time in manifests (outputs are then no longer byte-identical).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(ClapSubcommand, Debug)]
enum Command {
    /// Integrate one configuration and write snapshots, series and plots.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check estimates on a finished run.
    Verify {
        /// Manifest written by `run`.
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated checks; defaults to the run's `checks.list`.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Run a family of shrinking inner radii and compare the members.
    Continuation {
        #[arg(long)]
        config: PathBuf,
    },
    /// Grid refinement against the manufactured solution.
    Mms {
        #[arg(long)]
        config: PathBuf,
    },
    /// Regenerate series, plots and a text summary of a finished run.
    Report {
        #[arg(long)]
        manifest: PathBuf,
    },
}

pub struct Context {
    pub out: PathBuf,
    pub seed: u64,
    pub timing: bool,
}

fn dispatch(cli: Cli) -> Outcome<()> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .class(Class::Config)?;
    }
    let ctx = Context {
        out: cli.common.out,
        seed: cli.common.seed,
        timing: cli.common.timing,
    };
    match cli.command {
        Command::Run { config } => run::execute(&ctx, &parse_config(&config, Subcommand::Run)?),
        Command::Verify { manifest, checks } => verify::execute(&ctx, &manifest, checks.as_deref()),
        Command::Continuation { config } => {
            continuation::execute(&ctx, &parse_config(&config, Subcommand::Continuation)?)
        }
        Command::Mms { config } => mms::execute(&ctx, &parse_config(&config, Subcommand::Mms)?),
        Command::Report { manifest } => report::execute(&ctx, &manifest),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
