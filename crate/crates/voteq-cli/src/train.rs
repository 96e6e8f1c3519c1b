//! The `train` command: one agent, one environment, one seed, with
//! optional head checkpointing and a runlog CSV.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use voteq::ensemble::UtilityMode;
use voteq::harness::{
    fmt_float, parse_policy, policy_label, run_single_checkpointed, write_runlogs_csv, AgentSpec,
    EnsembleSettings, ExperimentConfig, MetricSettings,
};

use crate::common::EnvFlags;

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub env: EnvFlags,
    /// Policy: majority, rank, average, bootstrapped, boltzmann, or a
    /// committee rule (plurality|sntv, bloc, ccr, borda, judge, lottery).
    #[arg(long, default_value = "majority")]
    pub policy: String,
    /// Satisfaction threshold for committee policies (0 for lottery).
    #[arg(long)]
    pub s_thresh: Option<f64>,
    /// Agent display name (defaults to the policy label).
    #[arg(long)]
    pub agent_name: Option<String>,
    /// Total environment steps.
    #[arg(long, default_value_t = 50_000)]
    pub steps: u64,
    /// Run seed; fixes layouts, exploration, and initialization.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ensemble size (number of Q-learning heads).
    #[arg(long)]
    pub heads: Option<usize>,
    /// Q-learning step size.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Discount factor.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Exploration rate at step 0.
    #[arg(long)]
    pub epsilon_start: Option<f64>,
    /// Exploration rate after annealing.
    #[arg(long)]
    pub epsilon_end: Option<f64>,
    /// Steps over which exploration anneals linearly.
    #[arg(long)]
    pub epsilon_anneal: Option<u64>,
    /// Per-head Bernoulli update probability.
    #[arg(long)]
    pub mask_p: Option<f64>,
    /// Magnitude of the uniform head initialization.
    #[arg(long)]
    pub init_scale: Option<f64>,
    /// Ballot utilities: raw Q-values or their softmax.
    #[arg(long)]
    pub utility_mode: Option<String>,
    /// Write the run's episode log as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Save the trained head tables to this file.
    #[arg(long)]
    pub save: Option<PathBuf>,
    /// Load head tables from this file before training.
    #[arg(long)]
    pub load: Option<PathBuf>,
}

pub fn run(args: &TrainArgs) -> Result<()> {
    let env_spec = args.env.to_spec()?;
    let policy = parse_policy(&args.policy, args.s_thresh)?;
    let agent_spec = AgentSpec {
        name: args
            .agent_name
            .clone()
            .unwrap_or_else(|| policy_label(policy)),
        policy,
    };

    let mut ensemble = EnsembleSettings::default();
    if let Some(v) = args.heads {
        ensemble.heads = v;
    }
    if let Some(v) = args.alpha {
        ensemble.alpha = v;
    }
    if let Some(v) = args.gamma {
        ensemble.gamma = v;
    }
    if let Some(v) = args.epsilon_start {
        ensemble.epsilon_start = v;
    }
    if let Some(v) = args.epsilon_end {
        ensemble.epsilon_end = v;
    }
    if let Some(v) = args.epsilon_anneal {
        ensemble.epsilon_anneal_steps = v;
    }
    if let Some(v) = args.mask_p {
        ensemble.update_mask_p = v;
    }
    if let Some(v) = args.init_scale {
        ensemble.init_scale = v;
    }
    if let Some(mode) = &args.utility_mode {
        ensemble.utility_mode = match mode.as_str() {
            "raw" => UtilityMode::Raw,
            "softmax" => UtilityMode::Softmax,
            other => bail!("unknown utility mode `{other}` (expected raw or softmax)"),
        };
    }

    // A single run reports no sampled metric, but the config still carries
    // one; fit the sampling horizon inside the run.
    let sample_interval = (args.steps / 100).max(1);
    let sample_count = ((args.steps / sample_interval).min(100)).max(1) as usize;
    let metric = MetricSettings {
        sample_interval,
        sample_count,
        ..MetricSettings::default()
    };

    let config = ExperimentConfig::from_parts(
        vec![env_spec.clone()],
        vec![agent_spec.clone()],
        args.steps,
        vec![args.seed],
        ensemble,
        metric,
    )?;
    let log = run_single_checkpointed(
        &env_spec,
        &agent_spec,
        &config,
        args.seed,
        args.load.as_deref(),
        args.save.as_deref(),
    )?;

    println!("env: {}", log.env);
    println!("agent: {}", log.agent);
    println!("seed: {}", log.seed);
    println!("steps: {}", log.total_steps);
    println!("episodes: {}", log.entries.len());
    if !log.entries.is_empty() {
        let mean = log.entries.iter().map(|(_, r)| r).sum::<f64>() / log.entries.len() as f64;
        println!("mean_return: {}", fmt_float(mean));
        println!("final_return: {}", fmt_float(log.entries.last().unwrap().1));
    }
    if let Some(path) = &args.out {
        let mut buf = Vec::new();
        write_runlogs_csv(&mut buf, std::slice::from_ref(&log))?;
        fs::write(path, buf)
            .with_context(|| format!("cannot write runlog `{}`", path.display()))?;
        println!("runlog: {}", path.display());
    }
    if let Some(path) = &args.save {
        println!("heads: {}", path.display());
    }
    Ok(())
}
