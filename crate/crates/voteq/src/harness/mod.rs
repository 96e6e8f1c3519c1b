//! Experiment harness: validated TOML configs, a seed-parallel deterministic
//! runner, the max-of-EMA learning-curve metric, CSV/text reports, and SVG
//! learning-curve plots.

mod config;
mod logio;
mod metric;
mod plot;
mod report;
mod runner;

pub use config::{
    parse_config, parse_policy, policy_label, AgentSpec, EnsembleSettings, EnvKind, EnvSpec,
    ExperimentConfig, MetricSettings,
};
pub use logio::{fmt_float, read_runlogs_csv, write_runlogs_csv, RunLog};
pub use metric::{ema_metric, sample_points, AgentCurve};
pub use plot::learning_curve_svg;
pub use report::{compare_report, ComparisonReport};
pub use runner::{
    aggregate, curves_csv, execute_experiment, metric_report_csv, read_experiment, run_experiment,
    run_single, run_single_checkpointed, write_outputs, ExperimentOutput,
};

use thiserror::Error;

use crate::ensemble::EnsembleError;
use crate::env::EnvError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config parse error: {0}")]
    ConfigSyntax(String),
    #[error("{path}: {message}")]
    ConfigInvalid { path: String, message: String },
    #[error("config version {found} unsupported (expected {expected})")]
    ConfigVersion { found: u32, expected: u32 },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("run log is malformed: {0}")]
    BadLog(String),
    #[error(
        "sampling horizon {horizon} (interval x count) exceeds the {total_steps} logged training steps"
    )]
    HorizonTooLong { horizon: u64, total_steps: u64 },
    #[error("run for agent `{agent}` on `{env}` seed {seed} finished no episode; nothing to average")]
    NoEpisodes { agent: String, env: String, seed: u64 },
    #[error("metric input mixes runs of different agents or environments")]
    MixedMetricGroup,
    #[error("metric needs at least one run log")]
    NoMetricLogs,
    #[error("comparison needs at least two agents, got {0}")]
    NotComparable(usize),
    #[error("no run logs found in `{0}`")]
    NoRunLogs(String),
    #[error("thread pool error: {0}")]
    Parallel(String),
}
