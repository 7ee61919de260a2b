//! Command-line front end: protocol simulation, run-model building,
//! epistemic formula checking and the discrete-log majority protocol.
//!
//! Exit codes: 0 every expectation matched, 1 some expectation
//! mismatched, 2 bad input, 3 capacity exceeded.

mod avnet_cmd;
mod check;
mod fail;
mod scenario;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "judgebench",
    version,
    about = "Secure majority-vote protocols: simulation, run models, knowledge checking"
)]
struct Cli {
    /// Worker threads for formula checking (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cap on model states before giving up with a capacity error
    #[arg(long, global = true)]
    state_cap: Option<usize>,
    /// Override the randomness-sampling seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol across its decision/randomness space and summarise verdicts
    Simulate { scenario: PathBuf },
    /// Build the run model and check the scenario's formulas against it
    Check { scenario: PathBuf },
    /// Run the discrete-log majority protocol on a preset group
    Avnet {
        /// Group preset: small, medium or large
        #[arg(long, default_value = "small")]
        preset: String,
        /// Pair count; the bench seats 2n+1 judges
        #[arg(long)]
        n: usize,
        /// Votes, judge by judge
        #[arg(long, num_args = 1.., value_parser = clap::value_parser!(u8).range(0..=1), conflicts_with = "all")]
        votes: Vec<u8>,
        /// Sweep every vote vector and report verdict correctness
        #[arg(long)]
        all: bool,
    },
    /// Build the run model and write it out as a JSON document
    ExportModel {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate { scenario } => simulate::cmd_simulate(scenario, cli.seed),
        Command::Check { scenario } => check::cmd_check(scenario, cli.jobs, cli.state_cap, cli.seed),
        Command::Avnet {
            preset,
            n,
            votes,
            all,
        } => avnet_cmd::cmd_avnet(preset, *n, votes, *all, cli.seed),
        Command::ExportModel { scenario, out } => {
            check::cmd_export_model(scenario, out, cli.state_cap, cli.seed)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
