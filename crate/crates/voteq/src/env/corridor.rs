//! A corridor of states with terminal ends: a small reward at the left end,
//! a large one at the right. Each state wires two secret actions to "move
//! left" and "move right"; every other action stays put, so agents must
//! discover a different operational pair per state.

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use super::{EnvError, EnvStep, Environment};
use crate::seeding::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorConfig {
    /// Number of chain states including both terminal ends.
    pub state_count: usize,
    /// Size of the action set each state's operational pair is drawn from.
    pub action_count: usize,
    /// Steps after which an unfinished episode is truncated.
    pub episode_cap: u32,
    /// Trial count of the binomial start-state draw.
    pub start_trials: u64,
    /// Success probability of the binomial start-state draw.
    pub start_p: f64,
    /// Reward for entering the left terminal.
    pub reward_low: f64,
    /// Reward for entering the right terminal.
    pub reward_high: f64,
}

impl Default for CorridorConfig {
    fn default() -> Self {
        CorridorConfig {
            state_count: 50,
            action_count: 10,
            episode_cap: 100,
            start_trials: 49,
            start_p: 0.2,
            reward_low: 0.1,
            reward_high: 1.0,
        }
    }
}

impl CorridorConfig {
    /// The default chain with a custom action-set size.
    pub fn with_actions(action_count: usize) -> Self {
        CorridorConfig {
            action_count,
            ..CorridorConfig::default()
        }
    }

    fn validate(&self) -> Result<(), EnvError> {
        let fail = |msg: String| Err(EnvError::BadCorridorConfig(msg));
        if self.state_count < 3 {
            return fail(format!(
                "state_count must be at least 3 (two terminals plus an interior), got {}",
                self.state_count
            ));
        }
        if self.action_count < 2 {
            return fail(format!(
                "action_count must be at least 2, got {}",
                self.action_count
            ));
        }
        if self.episode_cap == 0 {
            return fail("episode_cap must be positive".into());
        }
        if self.start_trials as usize > self.state_count - 1 {
            return fail(format!(
                "start_trials {} exceeds the largest state index {}",
                self.start_trials,
                self.state_count - 1
            ));
        }
        if !(0.0..=1.0).contains(&self.start_p) || !self.start_p.is_finite() {
            return fail(format!("start_p must lie in [0, 1], got {}", self.start_p));
        }
        if !self.reward_low.is_finite() || !self.reward_high.is_finite() {
            return fail("terminal rewards must be finite".into());
        }
        Ok(())
    }
}

/// The instantiated chain. The operational action pair of every state is
/// drawn once from the layout stream and fixed for the instance lifetime.
#[derive(Debug, Clone)]
pub struct Corridor {
    config: CorridorConfig,
    left: Vec<usize>,
    right: Vec<usize>,
    state: usize,
    steps: u32,
    started: bool,
    finished: bool,
}

impl Corridor {
    pub fn new(config: CorridorConfig, layout_rng: &mut Rng) -> Result<Self, EnvError> {
        config.validate()?;
        let mut left = Vec::with_capacity(config.state_count);
        let mut right = Vec::with_capacity(config.state_count);
        for _ in 0..config.state_count {
            let l = layout_rng.gen_range(0..config.action_count);
            let r = loop {
                let r = layout_rng.gen_range(0..config.action_count);
                if r != l {
                    break r;
                }
            };
            left.push(l);
            right.push(r);
        }
        Ok(Corridor {
            config,
            left,
            right,
            state: 0,
            steps: 0,
            started: false,
            finished: false,
        })
    }

    pub fn config(&self) -> &CorridorConfig {
        &self.config
    }

    /// The action that moves one state toward the left terminal.
    pub fn left_action(&self, state: usize) -> usize {
        self.left[state]
    }

    /// The action that moves one state toward the right terminal.
    pub fn right_action(&self, state: usize) -> usize {
        self.right[state]
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        state == 0 || state == self.config.state_count - 1
    }

    pub fn current_state(&self) -> usize {
        self.state
    }
}

impl Environment for Corridor {
    fn state_count(&self) -> usize {
        self.config.state_count
    }

    fn action_count(&self) -> usize {
        self.config.action_count
    }

    fn reset(&mut self, rng: &mut Rng) -> usize {
        // Validated in new(): trials fit the index range and p lies in [0, 1].
        let draw = Binomial::new(self.config.start_trials, self.config.start_p)
            .expect("validated binomial parameters")
            .sample(rng) as usize;
        self.state = draw;
        self.steps = 0;
        self.started = true;
        self.finished = self.is_terminal(draw);
        self.state
    }

    fn finished(&self) -> bool {
        self.finished
    }

    fn step(&mut self, action: usize) -> Result<EnvStep, EnvError> {
        if action >= self.config.action_count {
            return Err(EnvError::ActionOutOfRange {
                action,
                actions: self.config.action_count,
            });
        }
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        self.steps += 1;
        let next = if action == self.left[self.state] {
            self.state - 1
        } else if action == self.right[self.state] {
            self.state + 1
        } else {
            self.state
        };
        let (reward, done) = if next == 0 {
            (self.config.reward_low, true)
        } else if next == self.config.state_count - 1 {
            (self.config.reward_high, true)
        } else {
            (0.0, false)
        };
        let truncated = !done && self.steps >= self.config.episode_cap;
        self.state = next;
        self.finished = done || truncated;
        Ok(EnvStep {
            observation: next,
            reward,
            done,
            truncated,
        })
    }

    fn describe(&self) -> String {
        let mut out = format!(
            "corridor: {} states, {} actions, cap {} steps, start ~ Binomial({}, {}), rewards {} | {}\n",
            self.config.state_count,
            self.config.action_count,
            self.config.episode_cap,
            self.config.start_trials,
            self.config.start_p,
            self.config.reward_low,
            self.config.reward_high,
        );
        for s in 0..self.config.state_count {
            let role = if self.is_terminal(s) { " (terminal)" } else { "" };
            out.push_str(&format!(
                "  state {:>3}: left={} right={}{}\n",
                s, self.left[s], self.right[s], role
            ));
        }
        out
    }
}
