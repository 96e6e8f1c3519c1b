//! `voteq` command line: committee elections, ensemble training runs, full
//! experiments, and report regeneration from stored logs.
//!
//! The binary is a thin shell over the `voteq` library: every number it
//! prints goes through the library's single float-formatting path, so
//! printed values match CSV contents bit for bit.

mod common;
mod elect;
mod envcmd;
mod experiment;
mod report;
mod train;

use clap::{Parser, Subcommand};

/// Committee elections and voting-ensemble reinforcement learning.
#[derive(Parser)]
#[command(name = "voteq", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Elect a committee from a ballot file.
    Elect(elect::ElectArgs),
    /// Train one ensemble agent on one environment.
    Train(train::TrainArgs),
    /// Run an experiment config: every env x agent x seed combination.
    Experiment(experiment::ExperimentArgs),
    /// Recompute the metric tables from a stored experiment directory.
    Report(report::ReportArgs),
    /// Inspect environments: configuration summaries and layout renderings.
    Env(envcmd::EnvCommand),
}

fn main() -> std::process::ExitCode {
    // Die quietly when a downstream pipe closes (`voteq ... | head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    // All command output is plain text (clap's own help/error styling
    // already honors NO_COLOR), so nothing here needs a color switch.
    let result = match Cli::parse().command {
        Command::Elect(args) => elect::run(&args),
        Command::Train(args) => train::run(&args),
        Command::Experiment(args) => experiment::run(&args),
        Command::Report(args) => report::run(&args),
        Command::Env(cmd) => envcmd::run(&cmd),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
