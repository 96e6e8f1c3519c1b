//! Tabular environments: the reward-at-the-ends corridor chain and four
//! small grid-world puzzles, behind one stepping interface.

mod corridor;
mod grid;

pub use corridor::{Corridor, CorridorConfig};
pub use grid::{success_reward, GridAction, GridConfig, GridKind, GridWorld, GRID_ACTION_COUNT};

use thiserror::Error;

use crate::seeding::Rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("action {action} out of range for {actions} actions")]
    ActionOutOfRange { action: usize, actions: usize },
    #[error("episode already finished; reset before stepping")]
    EpisodeFinished,
    #[error("environment was never reset")]
    NotReset,
    #[error("corridor config invalid: {0}")]
    BadCorridorConfig(String),
    #[error("grid config invalid: {0}")]
    BadGridConfig(String),
    #[error("state index {index} out of range for {states} states")]
    StateOutOfRange { index: usize, states: usize },
}

/// One transition's outcome. `done` means a terminal state was reached (the
/// bootstrap must be cut there); `truncated` means the step cap ended the
/// episode without a terminal (the bootstrap continues through it). The two
/// are never both set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvStep {
    pub observation: usize,
    pub reward: f64,
    pub done: bool,
    pub truncated: bool,
}

/// A seeded, fully observable tabular environment.
///
/// Construction fixes the layout (from a layout stream); `reset` randomizes
/// only the per-episode start (from the dynamics stream). Stepping a
/// finished episode is a usage error — after `done` or `truncated`, reset.
pub trait Environment {
    fn state_count(&self) -> usize;
    fn action_count(&self) -> usize;
    /// Starts a fresh episode and returns its first observation.
    fn reset(&mut self, rng: &mut Rng) -> usize;
    /// True when the current episode cannot be stepped further. In
    /// particular the corridor's biased start can (very rarely) draw a
    /// terminal state directly; callers should check after `reset` and
    /// re-reset instead of stepping.
    fn finished(&self) -> bool;
    fn step(&mut self, action: usize) -> Result<EnvStep, EnvError>;
    /// Human-readable layout description (text art for grids).
    fn describe(&self) -> String;
}
