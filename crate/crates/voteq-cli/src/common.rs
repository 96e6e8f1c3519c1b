//! Flags shared by commands that construct a single environment.

use anyhow::{bail, Result};
use clap::Args;
use voteq::env::{CorridorConfig, GridConfig, GridKind};
use voteq::harness::{EnvKind, EnvSpec};

/// Environment selection and sizing, mirroring the `[[envs]]` table of an
/// experiment config.
#[derive(Args, Debug)]
pub struct EnvFlags {
    /// Environment kind: corridor, door-key, multi-room, key-corridor, or
    /// obstructed-maze.
    #[arg(long, default_value = "corridor")]
    pub env: String,
    /// Override the environment's display name.
    #[arg(long)]
    pub env_name: Option<String>,
    /// Corridor only: size of the action set the hidden pairs are drawn from.
    #[arg(long)]
    pub actions: Option<usize>,
    /// Corridor only: chain length including both terminal ends.
    #[arg(long)]
    pub states: Option<usize>,
    /// Corridor only: steps after which an episode is truncated.
    #[arg(long)]
    pub episode_cap: Option<u32>,
    /// Grids only: board width.
    #[arg(long)]
    pub width: Option<usize>,
    /// Grids only: board height.
    #[arg(long)]
    pub height: Option<usize>,
    /// Grids only: steps after which an episode is truncated
    /// (default: 4 x width x height).
    #[arg(long)]
    pub max_steps: Option<u32>,
}

impl EnvFlags {
    /// Builds the environment spec these flags describe, rejecting flags
    /// that do not apply to the chosen kind.
    pub fn to_spec(&self) -> Result<EnvSpec> {
        if self.env == "corridor" {
            for (flag, given) in [
                ("--width", self.width.is_some()),
                ("--height", self.height.is_some()),
                ("--max-steps", self.max_steps.is_some()),
            ] {
                if given {
                    bail!("{flag} applies to grid environments, not the corridor");
                }
            }
            let mut config = CorridorConfig::default();
            if let Some(v) = self.actions {
                config.action_count = v;
            }
            if let Some(v) = self.states {
                config.state_count = v;
                config.start_trials = v.saturating_sub(1) as u64;
            }
            if let Some(v) = self.episode_cap {
                config.episode_cap = v;
            }
            let name = self
                .env_name
                .clone()
                .unwrap_or_else(|| format!("corridor-m{}", config.action_count));
            return Ok(EnvSpec {
                name,
                kind: EnvKind::Corridor(config),
            });
        }
        let Some(kind) = GridKind::parse(&self.env) else {
            bail!(
                "unknown environment `{}` (expected corridor, door-key, multi-room, key-corridor, or obstructed-maze)",
                self.env
            );
        };
        for (flag, given) in [
            ("--actions", self.actions.is_some()),
            ("--states", self.states.is_some()),
            ("--episode-cap", self.episode_cap.is_some()),
        ] {
            if given {
                bail!("{flag} applies to the corridor, not grid environments");
            }
        }
        let base = GridConfig::default_for(kind);
        let config = match (self.width, self.height) {
            (None, None) => GridConfig {
                max_steps: self.max_steps.unwrap_or(base.max_steps),
                ..base
            },
            (w, h) => {
                let sized = GridConfig::sized(kind, w.unwrap_or(base.width), h.unwrap_or(base.height));
                GridConfig {
                    max_steps: self.max_steps.unwrap_or(sized.max_steps),
                    ..sized
                }
            }
        };
        let name = self.env_name.clone().unwrap_or_else(|| kind.name().to_string());
        Ok(EnvSpec {
            name,
            kind: EnvKind::Grid(config),
        })
    }
}
