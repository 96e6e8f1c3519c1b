//! Experiment execution: per-(agent, seed) training runs with split RNG
//! streams, a seed-parallel driver, aggregation into curves and reports,
//! and the on-disk experiment directory layout.

use std::fs;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;

use super::config::{AgentSpec, EnvSpec, ExperimentConfig};
use super::logio::{fmt_float, read_runlogs_csv, write_runlogs_csv, RunLog};
use super::metric::{ema_metric, sample_points, AgentCurve};
use super::plot::learning_curve_svg;
use super::report::{compare_report, ComparisonReport};
use super::{parse_config, HarnessError};
use crate::ensemble::{EnsembleAgent, EnsembleConfig};
use crate::env::Environment;
use crate::qlearn::TransitionSample;
use crate::seeding::{derive_seed, seeded_rng, Rng};
use crate::tie::TieBreakPolicy;

/// Resets until the draw is a live (non-terminal) start; terminal draws
/// are discarded unlogged.
fn reset_live(env: &mut (dyn Environment + Send), rng: &mut Rng) -> usize {
    loop {
        let state = env.reset(rng);
        if !env.finished() {
            return state;
        }
    }
}

/// Trains one agent on one environment for one seed, fully determined by
/// the config and seed.
///
/// Stream split: the layout stream depends only on (seed, env) — every
/// agent sees the same layout for a given seed — while dynamics, agent
/// initialization, and bootstrap-resample streams are per (seed, env,
/// agent), so adding an agent to a config never perturbs another agent's
/// run.
pub fn run_single(
    env_spec: &EnvSpec,
    agent_spec: &AgentSpec,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<RunLog, HarnessError> {
    run_single_checkpointed(env_spec, agent_spec, config, seed, None, None)
}

/// [`run_single`] with optional head checkpoints: `load` restores saved
/// head tables before training (the RNG streams are unaffected, so a
/// loaded run still replays deterministically), `save` writes the trained
/// heads afterwards.
pub fn run_single_checkpointed(
    env_spec: &EnvSpec,
    agent_spec: &AgentSpec,
    config: &ExperimentConfig,
    seed: u64,
    load: Option<&Path>,
    save: Option<&Path>,
) -> Result<RunLog, HarnessError> {
    let mut layout_rng = seeded_rng(seed, &format!("layout:{}", env_spec.name));
    let mut env = env_spec.build(&mut layout_rng)?;
    let mut dynamics_rng = seeded_rng(
        seed,
        &format!("dynamics:{}:{}", env_spec.name, agent_spec.name),
    );
    let mut bootstrap_rng = seeded_rng(
        seed,
        &format!("bootstrap:{}:{}", env_spec.name, agent_spec.name),
    );
    let settings = &config.ensemble;
    let mut agent = EnsembleAgent::new(&EnsembleConfig {
        heads: settings.heads,
        states: env.state_count(),
        actions: env.action_count(),
        policy: agent_spec.policy,
        params: settings.params()?,
        tiebreak: TieBreakPolicy::LowestIndex,
        utility_mode: settings.utility_mode,
        update_mask_p: settings.update_mask_p,
        init_scale: settings.init_scale,
        seed: derive_seed(seed, &format!("agent:{}:{}", env_spec.name, agent_spec.name)),
    })?;
    if let Some(path) = load {
        let file = fs::File::open(path)?;
        agent.load_heads(std::io::BufReader::new(file))?;
    }

    let mut entries = Vec::new();
    let mut state = reset_live(env.as_mut(), &mut dynamics_rng);
    let mut episode_return = 0.0;
    for t in 0..config.total_steps {
        let action = agent.act(state, t)?;
        let step = env.step(action)?;
        episode_return += step.reward;
        agent.observe(&TransitionSample {
            state,
            action,
            reward: step.reward,
            next_state: step.observation,
            terminal: step.done,
        })?;
        state = step.observation;
        if step.done || step.truncated {
            entries.push((t + 1, episode_return));
            episode_return = 0.0;
            agent.end_episode(&mut bootstrap_rng);
            state = reset_live(env.as_mut(), &mut dynamics_rng);
        }
    }
    if let Some(path) = save {
        let mut buf = Vec::new();
        agent.save_heads(&mut buf)?;
        fs::write(path, buf)?;
    }
    // The final partial episode, if any, is never logged.
    let log = RunLog {
        agent: agent_spec.name.clone(),
        env: env_spec.name.clone(),
        seed,
        config_hash: config.config_hash,
        total_steps: config.total_steps,
        entries,
    };
    log.validate()?;
    Ok(log)
}

/// Runs the full env x agent x seed product. Runs are independent and
/// execute on the rayon pool (bounded to `jobs` threads when given); the
/// output order is the deterministic env-major, agent, seed order
/// regardless of scheduling.
pub fn run_experiment(
    config: &ExperimentConfig,
    jobs: Option<usize>,
) -> Result<Vec<RunLog>, HarnessError> {
    let mut tasks = Vec::new();
    for env_spec in &config.envs {
        for agent_spec in &config.agents {
            for &seed in &config.seeds {
                tasks.push((env_spec, agent_spec, seed));
            }
        }
    }
    let work = || {
        tasks
            .par_iter()
            .map(|(env_spec, agent_spec, seed)| run_single(env_spec, agent_spec, config, *seed))
            .collect::<Result<Vec<_>, _>>()
    };
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Parallel(e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// Everything an experiment produces in memory.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub logs: Vec<RunLog>,
    pub curves: Vec<AgentCurve>,
    /// Present when the config names at least two agents.
    pub comparison: Option<ComparisonReport>,
}

/// Aggregates existing logs into per-(env, agent) curves and, with two or
/// more agents, the comparison report.
pub fn aggregate(
    config: &ExperimentConfig,
    logs: &[RunLog],
) -> Result<(Vec<AgentCurve>, Option<ComparisonReport>), HarnessError> {
    let mut curves = Vec::new();
    for env_spec in &config.envs {
        for agent_spec in &config.agents {
            let group: Vec<&RunLog> = logs
                .iter()
                .filter(|l| l.env == env_spec.name && l.agent == agent_spec.name)
                .collect();
            if group.is_empty() {
                return Err(HarnessError::BadLog(format!(
                    "no runs for agent `{}` on `{}` in the logs",
                    agent_spec.name, env_spec.name
                )));
            }
            curves.push(ema_metric(&group, &config.metric)?);
        }
    }
    let comparison = if config.agents.len() >= 2 {
        Some(compare_report(&curves)?)
    } else {
        None
    };
    Ok((curves, comparison))
}

/// Runs an experiment and aggregates its results.
pub fn execute_experiment(
    config: &ExperimentConfig,
    jobs: Option<usize>,
) -> Result<ExperimentOutput, HarnessError> {
    let logs = run_experiment(config, jobs)?;
    let (curves, comparison) = aggregate(config, &logs)?;
    Ok(ExperimentOutput {
        logs,
        curves,
        comparison,
    })
}

fn safe_file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '-'
            }
        })
        .collect()
}

/// Writes an experiment directory: the config copy, `runlogs.csv`,
/// `metric_report.csv`, `curves.csv`, the comparison (text + CSV) when
/// present, and optional per-environment SVG plots.
pub fn write_outputs(
    dir: &Path,
    config_text: &str,
    output: &ExperimentOutput,
    plots: bool,
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), config_text)?;

    let mut runlogs = Vec::new();
    write_runlogs_csv(&mut runlogs, &output.logs)?;
    fs::write(dir.join("runlogs.csv"), runlogs)?;

    fs::write(dir.join("metric_report.csv"), metric_report_csv(&output.curves))?;
    fs::write(dir.join("curves.csv"), curves_csv(&output.curves))?;

    if let Some(report) = &output.comparison {
        fs::write(dir.join("comparison.csv"), report.to_csv())?;
        fs::write(dir.join("comparison.txt"), report.to_text())?;
    }

    if plots {
        let plot_dir = dir.join("plots");
        fs::create_dir_all(&plot_dir)?;
        let mut envs: Vec<&str> = Vec::new();
        for curve in &output.curves {
            if !envs.contains(&curve.env.as_str()) {
                envs.push(&curve.env);
            }
        }
        for env in envs {
            let group: Vec<&AgentCurve> =
                output.curves.iter().filter(|c| c.env == env).collect();
            let svg = learning_curve_svg(env, &group);
            fs::write(plot_dir.join(format!("{}.svg", safe_file_stem(env))), svg)?;
        }
    }
    Ok(())
}

/// The per-agent score table as CSV; the metric settings ride along in
/// every row so any excerpt stays self-describing.
pub fn metric_report_csv(curves: &[AgentCurve]) -> String {
    let mut out =
        String::from("agent,env,score,score_step,stderr,seeds,ema_coeff,sample_interval,sample_count\n");
    for c in curves {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.agent,
            c.env,
            fmt_float(c.score),
            c.score_step,
            fmt_float(c.stderr_at_peak),
            c.seeds,
            fmt_float(c.settings.ema_coeff),
            c.settings.sample_interval,
            c.settings.sample_count,
        ));
    }
    out
}

/// Long-form mean curves (one row per sample point) for plotting tools.
pub fn curves_csv(curves: &[AgentCurve]) -> String {
    let mut out = String::from("env,agent,sample_step,mean_ema\n");
    for c in curves {
        for (point, value) in sample_points(&c.settings).iter().zip(&c.mean_curve) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                c.env,
                c.agent,
                point,
                fmt_float(*value)
            ));
        }
    }
    out
}

/// Loads an experiment directory back: the stored config and its run logs.
pub fn read_experiment(dir: &Path) -> Result<(ExperimentConfig, Vec<RunLog>), HarnessError> {
    let logs_path = dir.join("runlogs.csv");
    if !logs_path.is_file() {
        return Err(HarnessError::NoRunLogs(dir.display().to_string()));
    }
    let config_path = dir.join("config.toml");
    let config_text = fs::read_to_string(&config_path).map_err(|e| {
        HarnessError::ConfigSyntax(format!("cannot read {}: {e}", config_path.display()))
    })?;
    let config = parse_config(&config_text)?;
    let mut file = fs::File::open(&logs_path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let logs = read_runlogs_csv(bytes.as_slice(), config.config_hash, config.total_steps)?;
    Ok((config, logs))
}
