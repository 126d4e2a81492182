#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Overrides};
use config::Mode;

#[derive(Parser)]
#[command(name = "sbg", version, about = "Monte Carlo for extrema of Levy processes via stick-breaking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an MC or MLMC estimate and write report.json and levels.csv.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Bias and level-variance scan over a geometric cutoff grid.
    Scan {
        #[command(flatten)]
        common: Common,
    },
    /// Cost ratio of whole-horizon jump-diffusion sampling over stick-breaking.
    Speedup {
        #[command(flatten)]
        common: Common,
    },
    /// Statistical invariant suite.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let (common, mode, eps) = match &cli.command {
        Command::Estimate { common, mode, eps } => (common, *mode, *eps),
        Command::Scan { common } | Command::Speedup { common } | Command::Validate { common } => (common, None, None),
    };
    let path = common.config.as_ref().ok_or_else(|| Failure::Config("missing --config".into()))?;
    let exp = config::load(path).map_err(|m| Failure::Config(format!("{}: {m}", path.display())))?;
    let ov = Overrides { mode, eps, seed: common.seed, workers: common.workers, out: common.out.clone() };
    match cli.command {
        Command::Estimate { .. } => commands::estimate(&exp, &ov),
        Command::Scan { .. } => commands::scan(&exp, &ov),
        Command::Speedup { .. } => commands::speedup(&exp, &ov),
        Command::Validate { .. } => commands::validate(&exp, &ov),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sbg: {f}");
            ExitCode::from(f.code())
        }
    }
}
