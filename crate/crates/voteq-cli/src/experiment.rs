//! The `experiment` command: run a config end to end and write the
//! experiment directory.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use voteq::harness::{execute_experiment, metric_report_csv, parse_config, write_outputs};

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Experiment config (TOML, `version = 1`).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Bound on worker threads (default: one per core).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write per-environment SVG learning-curve plots.
    #[arg(long)]
    pub plots: bool,
}

pub fn run(args: &ExperimentArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read config `{}`", args.config.display()))?;
    let config = parse_config(&text)?;
    let output = execute_experiment(&config, args.jobs)?;
    write_outputs(&args.out, &text, &output, args.plots)
        .with_context(|| format!("cannot write outputs to `{}`", args.out.display()))?;

    print!("{}", metric_report_csv(&output.curves));
    if let Some(report) = &output.comparison {
        println!();
        print!("{}", report.to_text());
    }
    println!();
    println!("wrote: {}", args.out.display());
    Ok(())
}
