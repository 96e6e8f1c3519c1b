//! Experiment configuration: a versioned TOML schema parsed into validated
//! typed settings, with field-path-anchored diagnostics.

use serde::Deserialize;

use super::logio::fmt_float;
use super::HarnessError;
use crate::ensemble::{PolicyKind, UtilityMode};
use crate::env::{Corridor, CorridorConfig, Environment, GridConfig, GridKind, GridWorld};
use crate::qlearn::{EpsilonSchedule, LearningParams};
use crate::seeding::{derive_seed, seeded_rng, Rng};
use crate::vote::ScoringRule;

pub const CONFIG_VERSION: u32 = 1;

/// One environment slot of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub kind: EnvKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvKind {
    Corridor(CorridorConfig),
    Grid(GridConfig),
}

impl EnvSpec {
    /// Instantiates the environment, drawing its layout from `layout_rng`.
    pub fn build(&self, layout_rng: &mut Rng) -> Result<Box<dyn Environment + Send>, HarnessError> {
        Ok(match &self.kind {
            EnvKind::Corridor(config) => Box::new(Corridor::new(config.clone(), layout_rng)?),
            EnvKind::Grid(config) => Box::new(GridWorld::new(config.clone(), layout_rng)?),
        })
    }

    fn canonical(&self) -> String {
        match &self.kind {
            EnvKind::Corridor(c) => format!(
                "env {} corridor {} {} {} {} {} {} {}",
                self.name,
                c.state_count,
                c.action_count,
                c.episode_cap,
                c.start_trials,
                fmt_float(c.start_p),
                fmt_float(c.reward_low),
                fmt_float(c.reward_high),
            ),
            EnvKind::Grid(g) => format!(
                "env {} grid {} {} {} {}",
                self.name,
                g.kind.name(),
                g.width,
                g.height,
                g.max_steps
            ),
        }
    }
}

/// One agent slot: a named ensemble policy.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    pub policy: PolicyKind,
}

impl AgentSpec {
    fn canonical(&self) -> String {
        format!("agent {} {}", self.name, policy_label_full(self.policy))
    }
}

/// Canonical short label for a policy (also the default agent name).
pub fn policy_label(policy: PolicyKind) -> String {
    match policy {
        PolicyKind::MajorityVoting => "majority".into(),
        PolicyKind::RankVoting => "rank".into(),
        PolicyKind::Average => "average".into(),
        PolicyKind::Bootstrapped => "bootstrapped".into(),
        PolicyKind::BoltzmannAddition => "boltzmann".into(),
        PolicyKind::CommitteeRule { rule, .. } => rule.name().into(),
    }
}

fn policy_label_full(policy: PolicyKind) -> String {
    match policy {
        PolicyKind::CommitteeRule { rule, s_thresh } => {
            format!("committee {} {}", rule.name(), fmt_float(s_thresh))
        }
        other => policy_label(other),
    }
}

/// Shared ensemble hyperparameters for every agent in an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSettings {
    pub heads: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_anneal_steps: u64,
    pub utility_mode: UtilityMode,
    pub update_mask_p: f64,
    pub init_scale: f64,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        EnsembleSettings {
            heads: 10,
            alpha: 0.2,
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.001,
            epsilon_anneal_steps: 100_000,
            utility_mode: UtilityMode::Raw,
            update_mask_p: 1.0,
            init_scale: 0.01,
        }
    }
}

impl EnsembleSettings {
    pub fn schedule(&self) -> Result<EpsilonSchedule, HarnessError> {
        EpsilonSchedule::new(self.epsilon_start, self.epsilon_end, self.epsilon_anneal_steps)
            .map_err(|e| invalid("ensemble", &e.to_string()))
    }

    pub fn params(&self) -> Result<LearningParams, HarnessError> {
        LearningParams::new(self.alpha, self.gamma, self.schedule()?)
            .map_err(|e| invalid("ensemble", &e.to_string()))
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.heads == 0 {
            return Err(invalid("ensemble.heads", "must be at least 1"));
        }
        self.params()?;
        if !(0.0..=1.0).contains(&self.update_mask_p) || !self.update_mask_p.is_finite() {
            return Err(invalid(
                "ensemble.update_mask_p",
                &format!("must lie in [0, 1], got {}", self.update_mask_p),
            ));
        }
        if !self.init_scale.is_finite() || self.init_scale < 0.0 {
            return Err(invalid(
                "ensemble.init_scale",
                &format!("must be finite and non-negative, got {}", self.init_scale),
            ));
        }
        Ok(())
    }

    fn canonical(&self) -> String {
        format!(
            "ensemble {} {} {} {} {} {} {} {} {}",
            self.heads,
            fmt_float(self.alpha),
            fmt_float(self.gamma),
            fmt_float(self.epsilon_start),
            fmt_float(self.epsilon_end),
            self.epsilon_anneal_steps,
            match self.utility_mode {
                UtilityMode::Raw => "raw",
                UtilityMode::Softmax => "softmax",
            },
            fmt_float(self.update_mask_p),
            fmt_float(self.init_scale),
        )
    }
}

/// The learning-curve metric's smoothing and sampling settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSettings {
    /// Per-episode EMA smoothing coefficient.
    pub ema_coeff: f64,
    /// Step distance between consecutive sample points.
    pub sample_interval: u64,
    /// Number of equidistant sample points.
    pub sample_count: usize,
}

impl Default for MetricSettings {
    fn default() -> Self {
        MetricSettings {
            ema_coeff: 0.999,
            sample_interval: 2000,
            sample_count: 100,
        }
    }
}

impl MetricSettings {
    pub fn horizon(&self) -> u64 {
        self.sample_interval.saturating_mul(self.sample_count as u64)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if !(0.0..1.0).contains(&self.ema_coeff) {
            return Err(invalid(
                "metric.ema_coeff",
                &format!("must lie in [0, 1), got {}", self.ema_coeff),
            ));
        }
        if self.sample_interval == 0 {
            return Err(invalid("metric.sample_interval", "must be positive"));
        }
        if self.sample_count == 0 {
            return Err(invalid("metric.sample_count", "must be positive"));
        }
        Ok(())
    }

    fn canonical(&self) -> String {
        format!(
            "metric {} {} {}",
            fmt_float(self.ema_coeff),
            self.sample_interval,
            self.sample_count
        )
    }
}

/// A fully validated experiment: environments x agents x seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub envs: Vec<EnvSpec>,
    pub agents: Vec<AgentSpec>,
    pub total_steps: u64,
    pub seeds: Vec<u64>,
    pub ensemble: EnsembleSettings,
    pub metric: MetricSettings,
    /// Stable digest of every setting above, stamped into run logs.
    pub config_hash: u64,
}

impl ExperimentConfig {
    pub fn from_parts(
        envs: Vec<EnvSpec>,
        agents: Vec<AgentSpec>,
        total_steps: u64,
        seeds: Vec<u64>,
        ensemble: EnsembleSettings,
        metric: MetricSettings,
    ) -> Result<ExperimentConfig, HarnessError> {
        let mut config = ExperimentConfig {
            envs,
            agents,
            total_steps,
            seeds,
            ensemble,
            metric,
            config_hash: 0,
        };
        config.validate()?;
        config.config_hash = derive_seed(0, &config.canonical());
        Ok(config)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.envs.is_empty() {
            return Err(invalid("envs", "at least one environment is required"));
        }
        if self.agents.is_empty() {
            return Err(invalid("agents", "at least one agent is required"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("run.seeds", "seed list must be non-empty"));
        }
        if self.total_steps == 0 {
            return Err(invalid("run.total_steps", "must be positive"));
        }
        self.ensemble.validate()?;
        self.metric.validate()?;
        let horizon = self.metric.horizon();
        if horizon > self.total_steps {
            return Err(invalid(
                "metric",
                &format!(
                    "sample_interval x sample_count = {horizon} exceeds run.total_steps = {}",
                    self.total_steps
                ),
            ));
        }
        for (i, env) in self.envs.iter().enumerate() {
            // One construction path validates every environment setting.
            let mut probe = seeded_rng(0, "config-probe");
            env.build(&mut probe)
                .map_err(|e| invalid(&format!("envs[{i}]"), &e.to_string()))?;
            if env.name.is_empty() {
                return Err(invalid(&format!("envs[{i}].name"), "must not be empty"));
            }
        }
        for (i, agent) in self.agents.iter().enumerate() {
            if agent.name.is_empty() {
                return Err(invalid(&format!("agents[{i}].name"), "must not be empty"));
            }
            if let PolicyKind::CommitteeRule { s_thresh, .. } = agent.policy {
                if !s_thresh.is_finite() || s_thresh < 0.0 {
                    return Err(invalid(
                        &format!("agents[{i}].s_thresh"),
                        &format!("must be finite and non-negative, got {s_thresh}"),
                    ));
                }
            }
        }
        for (kind, names) in [
            ("envs", self.envs.iter().map(|e| &e.name).collect::<Vec<_>>()),
            ("agents", self.agents.iter().map(|a| &a.name).collect()),
        ] {
            for (i, name) in names.iter().enumerate() {
                if names[..i].contains(name) {
                    return Err(invalid(
                        &format!("{kind}[{i}].name"),
                        &format!("duplicate name `{name}`"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn canonical(&self) -> String {
        let mut out = format!("version {CONFIG_VERSION}\ntotal_steps {}\nseeds", self.total_steps);
        for seed in &self.seeds {
            out.push_str(&format!(" {seed}"));
        }
        out.push('\n');
        out.push_str(&self.ensemble.canonical());
        out.push('\n');
        out.push_str(&self.metric.canonical());
        out.push('\n');
        for env in &self.envs {
            out.push_str(&env.canonical());
            out.push('\n');
        }
        for agent in &self.agents {
            out.push_str(&agent.canonical());
            out.push('\n');
        }
        out
    }
}

fn invalid(path: &str, message: &str) -> HarnessError {
    HarnessError::ConfigInvalid {
        path: path.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    run: RawRun,
    #[serde(default)]
    ensemble: RawEnsemble,
    #[serde(default)]
    metric: RawMetric,
    #[serde(default)]
    envs: Vec<RawEnv>,
    #[serde(default)]
    agents: Vec<RawAgent>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    total_steps: u64,
    seeds: Vec<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    heads: Option<usize>,
    alpha: Option<f64>,
    gamma: Option<f64>,
    epsilon_start: Option<f64>,
    epsilon_end: Option<f64>,
    epsilon_anneal_steps: Option<u64>,
    utility_mode: Option<String>,
    update_mask_p: Option<f64>,
    init_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    ema_coeff: Option<f64>,
    sample_interval: Option<u64>,
    sample_count: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    name: Option<String>,
    kind: String,
    // Corridor settings.
    actions: Option<usize>,
    states: Option<usize>,
    episode_cap: Option<u32>,
    start_p: Option<f64>,
    // Grid settings.
    width: Option<usize>,
    height: Option<usize>,
    max_steps: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    name: Option<String>,
    policy: String,
    s_thresh: Option<f64>,
}

/// Parses and validates a TOML experiment config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| HarnessError::ConfigSyntax(e.to_string()))?;
    if raw.version != CONFIG_VERSION {
        return Err(HarnessError::ConfigVersion {
            found: raw.version,
            expected: CONFIG_VERSION,
        });
    }

    let defaults = EnsembleSettings::default();
    let utility_mode = match raw.ensemble.utility_mode.as_deref() {
        None | Some("raw") => UtilityMode::Raw,
        Some("softmax") => UtilityMode::Softmax,
        Some(other) => {
            return Err(invalid(
                "ensemble.utility_mode",
                &format!("expected `raw` or `softmax`, got `{other}`"),
            ))
        }
    };
    let ensemble = EnsembleSettings {
        heads: raw.ensemble.heads.unwrap_or(defaults.heads),
        alpha: raw.ensemble.alpha.unwrap_or(defaults.alpha),
        gamma: raw.ensemble.gamma.unwrap_or(defaults.gamma),
        epsilon_start: raw.ensemble.epsilon_start.unwrap_or(defaults.epsilon_start),
        epsilon_end: raw.ensemble.epsilon_end.unwrap_or(defaults.epsilon_end),
        epsilon_anneal_steps: raw
            .ensemble
            .epsilon_anneal_steps
            .unwrap_or(defaults.epsilon_anneal_steps),
        utility_mode,
        update_mask_p: raw.ensemble.update_mask_p.unwrap_or(defaults.update_mask_p),
        init_scale: raw.ensemble.init_scale.unwrap_or(defaults.init_scale),
    };

    let metric_defaults = MetricSettings::default();
    let metric = MetricSettings {
        ema_coeff: raw.metric.ema_coeff.unwrap_or(metric_defaults.ema_coeff),
        sample_interval: raw
            .metric
            .sample_interval
            .unwrap_or(metric_defaults.sample_interval),
        sample_count: raw.metric.sample_count.unwrap_or(metric_defaults.sample_count),
    };

    let envs = raw
        .envs
        .iter()
        .enumerate()
        .map(|(i, raw_env)| parse_env(i, raw_env))
        .collect::<Result<Vec<_>, _>>()?;
    let agents = raw
        .agents
        .iter()
        .enumerate()
        .map(|(i, raw_agent)| parse_agent(i, raw_agent))
        .collect::<Result<Vec<_>, _>>()?;

    ExperimentConfig::from_parts(envs, agents, raw.run.total_steps, raw.run.seeds, ensemble, metric)
}

fn parse_env(i: usize, raw: &RawEnv) -> Result<EnvSpec, HarnessError> {
    let path = |field: &str| format!("envs[{i}].{field}");
    let reject_grid_fields = |kind: &str| -> Result<(), HarnessError> {
        for (name, set) in [
            ("width", raw.width.is_some()),
            ("height", raw.height.is_some()),
            ("max_steps", raw.max_steps.is_some()),
        ] {
            if set {
                return Err(invalid(&path(name), &format!("not a `{kind}` setting")));
            }
        }
        Ok(())
    };
    let reject_corridor_fields = |kind: &str| -> Result<(), HarnessError> {
        for (name, set) in [
            ("actions", raw.actions.is_some()),
            ("states", raw.states.is_some()),
            ("episode_cap", raw.episode_cap.is_some()),
            ("start_p", raw.start_p.is_some()),
        ] {
            if set {
                return Err(invalid(&path(name), &format!("not a `{kind}` setting")));
            }
        }
        Ok(())
    };

    if raw.kind == "corridor" {
        reject_grid_fields("corridor")?;
        let defaults = CorridorConfig::default();
        let state_count = raw.states.unwrap_or(defaults.state_count);
        let config = CorridorConfig {
            state_count,
            action_count: raw.actions.unwrap_or(defaults.action_count),
            episode_cap: raw.episode_cap.unwrap_or(defaults.episode_cap),
            start_trials: (state_count.max(1) - 1) as u64,
            start_p: raw.start_p.unwrap_or(defaults.start_p),
            ..defaults
        };
        let name = raw
            .name
            .clone()
            .unwrap_or_else(|| format!("corridor-m{}", config.action_count));
        return Ok(EnvSpec {
            name,
            kind: EnvKind::Corridor(config),
        });
    }

    let Some(kind) = GridKind::parse(&raw.kind) else {
        return Err(invalid(
            &path("kind"),
            &format!(
                "unknown environment kind `{}` (expected corridor, door-key, multi-room, key-corridor, or obstructed-maze)",
                raw.kind
            ),
        ));
    };
    reject_corridor_fields(kind.name())?;
    let defaults = GridConfig::default_for(kind);
    let width = raw.width.unwrap_or(defaults.width);
    let height = raw.height.unwrap_or(defaults.height);
    let config = GridConfig {
        kind,
        width,
        height,
        max_steps: raw.max_steps.unwrap_or((4 * width * height) as u32),
    };
    Ok(EnvSpec {
        name: raw.name.clone().unwrap_or_else(|| kind.name().to_string()),
        kind: EnvKind::Grid(config),
    })
}

/// Parses a policy name (a classic ensemble policy or a committee rule)
/// plus its optional threshold into a [`PolicyKind`]. Errors anchor to
/// `policy` or `s_thresh`.
pub fn parse_policy(name: &str, s_thresh: Option<f64>) -> Result<PolicyKind, HarnessError> {
    let classic = match name {
        "majority" | "majority-voting" => Some(PolicyKind::MajorityVoting),
        "rank" | "rank-voting" => Some(PolicyKind::RankVoting),
        "average" => Some(PolicyKind::Average),
        "bootstrapped" => Some(PolicyKind::Bootstrapped),
        "boltzmann" | "boltzmann-addition" => Some(PolicyKind::BoltzmannAddition),
        _ => None,
    };
    if let Some(kind) = classic {
        if s_thresh.is_some() {
            return Err(invalid(
                "s_thresh",
                &format!("`{name}` is a single-winner policy; no threshold applies"),
            ));
        }
        return Ok(kind);
    }
    // The bootstrap voter index is resolved per episode by the agent.
    let rule = ScoringRule::parse(name, Some(0)).map_err(|_| {
        invalid(
            "policy",
            &format!(
                "unknown policy `{name}` (expected majority, rank, average, bootstrapped, boltzmann, or a committee rule: plurality|sntv, bloc, ccr, borda, judge, lottery)"
            ),
        )
    })?;
    let s_thresh = match (rule, s_thresh) {
        (ScoringRule::Lottery { .. }, Some(t)) if t != 0.0 => {
            return Err(invalid(
                "s_thresh",
                "lottery elects a single action; s_thresh must be 0 or omitted",
            ))
        }
        (ScoringRule::Lottery { .. }, _) => 0.0,
        (_, Some(t)) => t,
        (_, None) => {
            return Err(invalid(
                "s_thresh",
                &format!("required for committee policy `{name}`"),
            ))
        }
    };
    Ok(PolicyKind::CommitteeRule { rule, s_thresh })
}

fn parse_agent(i: usize, raw: &RawAgent) -> Result<AgentSpec, HarnessError> {
    let policy = parse_policy(&raw.policy, raw.s_thresh).map_err(|e| match e {
        HarnessError::ConfigInvalid { path, message } => HarnessError::ConfigInvalid {
            path: format!("agents[{i}].{path}"),
            message,
        },
        other => other,
    })?;
    Ok(AgentSpec {
        name: raw.name.clone().unwrap_or_else(|| policy_label(policy)),
        policy,
    })
}
