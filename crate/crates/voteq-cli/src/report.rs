//! The `report` command: recompute the metric tables from a stored
//! experiment directory.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use voteq::harness::{aggregate, metric_report_csv, read_experiment};

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Experiment directory written by `voteq experiment`.
    #[arg(long)]
    pub dir: PathBuf,
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let (config, logs) = read_experiment(&args.dir)?;
    let (curves, comparison) = aggregate(&config, &logs)?;
    print!("{}", metric_report_csv(&curves));
    if let Some(report) = &comparison {
        println!();
        print!("{}", report.to_text());
    }
    Ok(())
}
