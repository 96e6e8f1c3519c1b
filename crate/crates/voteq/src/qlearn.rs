//! Tabular Q-learning: tables, the one-step update, exploration schedules,
//! checkpoint I/O, and a value-iteration oracle for convergence tests.

use std::io::{self, BufRead, Write};

use rand::Rng as _;
use thiserror::Error;

use crate::seeding::Rng;
use crate::tie::{TieBreakPolicy, TieBreaker};

#[derive(Debug, Error)]
pub enum QError {
    #[error("state {state} out of range for {states} states")]
    StateOutOfRange { state: usize, states: usize },
    #[error("action {action} out of range for {actions} actions")]
    ActionOutOfRange { action: usize, actions: usize },
    #[error("table dimensions must be positive (got {states}×{actions})")]
    EmptyTable { states: usize, actions: usize },
    #[error("learning rate must be in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("discount factor must be in [0, 1), got {0}")]
    InvalidGamma(f64),
    #[error("epsilon schedule needs 0 ≤ end ≤ start ≤ 1, got start {start}, end {end}")]
    InvalidEpsilonRange { start: f64, end: f64 },
    #[error("epsilon schedule needs a positive anneal length")]
    ZeroAnnealSteps,
    #[error("reward must be finite, got {0}")]
    NonFiniteReward(f64),
    #[error("transition row for state {state}, action {action} sums to {sum}, not 1")]
    NonStochasticRow { state: usize, action: usize, sum: f64 },
    #[error("transition probability for state {state}, action {action} is negative or non-finite")]
    InvalidProbability { state: usize, action: usize },
    #[error("value-iteration tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("checkpoint I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error("checkpoint line {line}: {message}")]
    MalformedCheckpoint { line: usize, message: String },
}

/// A dense `states × actions` table of finite action values.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Vec<f64>,
    states: usize,
    actions: usize,
}

impl QTable {
    pub fn zeros(states: usize, actions: usize) -> Result<Self, QError> {
        if states == 0 || actions == 0 {
            return Err(QError::EmptyTable { states, actions });
        }
        Ok(QTable {
            values: vec![0.0; states * actions],
            states,
            actions,
        })
    }

    /// A table with i.i.d. Uniform(−scale, scale) entries — the standard
    /// small random initialization that keeps early greedy choices diverse
    /// without competing with task-scale rewards.
    pub fn uniform_init(states: usize, actions: usize, scale: f64, rng: &mut Rng) -> Result<Self, QError> {
        let mut table = QTable::zeros(states, actions)?;
        if scale != 0.0 {
            for v in &mut table.values {
                *v = rng.gen_range(-scale..scale);
            }
        }
        Ok(table)
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        assert!(state < self.states && action < self.actions);
        self.values[state * self.actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        assert!(state < self.states && action < self.actions);
        self.values[state * self.actions + action] = value;
    }

    /// The full action-value row for `state`.
    pub fn row(&self, state: usize) -> &[f64] {
        assert!(state < self.states);
        &self.values[state * self.actions..(state + 1) * self.actions]
    }

    /// `max_a Q(s, a)` — the greedy bootstrap value.
    pub fn max_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute entry-wise difference to another table of identical
    /// dimensions.
    pub fn sup_distance(&self, other: &QTable) -> f64 {
        assert_eq!(self.states, other.states);
        assert_eq!(self.actions, other.actions);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Writes the table as a versioned text checkpoint. Values are printed
    /// with shortest-round-trip formatting, so `read_from` restores them
    /// bit-exactly.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), QError> {
        writeln!(out, "qtable 1")?;
        writeln!(out, "{} {}", self.states, self.actions)?;
        for s in 0..self.states {
            let row: Vec<String> = self.row(s).iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Reads a checkpoint written by [`QTable::write_to`].
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, QError> {
        let mut lines = reader.lines().enumerate();
        let mut next_line = |expect: &str| -> Result<(usize, String), QError> {
            match lines.next() {
                Some((i, Ok(line))) => Ok((i + 1, line)),
                Some((i, Err(e))) => Err(QError::MalformedCheckpoint {
                    line: i + 1,
                    message: e.to_string(),
                }),
                None => Err(QError::MalformedCheckpoint {
                    line: 0,
                    message: format!("unexpected end of file, expected {expect}"),
                }),
            }
        };
        let (line_no, header) = next_line("header")?;
        if header.trim() != "qtable 1" {
            return Err(QError::MalformedCheckpoint {
                line: line_no,
                message: format!("expected `qtable 1` header, got `{header}`"),
            });
        }
        let (line_no, dims) = next_line("dimensions")?;
        let mut parts = dims.split_whitespace();
        let parse_dim = |token: Option<&str>, line: usize| -> Result<usize, QError> {
            token
                .and_then(|t| t.parse().ok())
                .ok_or(QError::MalformedCheckpoint {
                    line,
                    message: format!("expected `<states> <actions>`, got `{dims}`"),
                })
        };
        let states = parse_dim(parts.next(), line_no)?;
        let actions = parse_dim(parts.next(), line_no)?;
        let mut table = QTable::zeros(states, actions).map_err(|_| QError::MalformedCheckpoint {
            line: line_no,
            message: format!("invalid dimensions {states}×{actions}"),
        })?;
        for s in 0..states {
            let (line_no, row) = next_line("a value row")?;
            let values: Vec<&str> = row.split_whitespace().collect();
            if values.len() != actions {
                return Err(QError::MalformedCheckpoint {
                    line: line_no,
                    message: format!("expected {actions} values, got {}", values.len()),
                });
            }
            for (a, token) in values.iter().enumerate() {
                let value: f64 = token.parse().map_err(|_| QError::MalformedCheckpoint {
                    line: line_no,
                    message: format!("bad value `{token}`"),
                })?;
                if !value.is_finite() {
                    return Err(QError::MalformedCheckpoint {
                        line: line_no,
                        message: format!("non-finite value `{token}`"),
                    });
                }
                table.set(s, a, value);
            }
        }
        Ok(table)
    }
}

/// Linear exploration schedule: `start` at step 0, annealed to `end` over
/// `anneal_steps`, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    start: f64,
    end: f64,
    anneal_steps: u64,
}

impl EpsilonSchedule {
    pub fn new(start: f64, end: f64, anneal_steps: u64) -> Result<Self, QError> {
        if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || end > start {
            return Err(QError::InvalidEpsilonRange { start, end });
        }
        if anneal_steps == 0 {
            return Err(QError::ZeroAnnealSteps);
        }
        Ok(EpsilonSchedule { start, end, anneal_steps })
    }

    /// Constant exploration rate (`ε = 1` gives the uniform-random baseline).
    pub fn constant(value: f64) -> Result<Self, QError> {
        EpsilonSchedule::new(value, value, 1)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn anneal_steps(&self) -> u64 {
        self.anneal_steps
    }

    pub fn epsilon_at(&self, t: u64) -> f64 {
        if t >= self.anneal_steps {
            return self.end;
        }
        let frac = t as f64 / self.anneal_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

/// Learning-rate, discount, and exploration hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
}

impl LearningParams {
    pub fn new(alpha: f64, gamma: f64, epsilon: EpsilonSchedule) -> Result<Self, QError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(QError::InvalidAlpha(alpha));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(QError::InvalidGamma(gamma));
        }
        Ok(LearningParams { alpha, gamma, epsilon })
    }
}

/// One observed transition `⟨s, a, r, s′⟩` plus whether `s′` ended the
/// episode by reaching a terminal state. Time-limit truncation is *not*
/// terminal: the bootstrap continues through it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionSample {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    pub terminal: bool,
}

/// Applies the one-step update
/// `Q(s,a) ← (1−α)·Q(s,a) + α·(r + γ·max_a′ Q(s′,a′))`,
/// with the bootstrap term zeroed on terminal transitions. Touches exactly
/// entry `(s, a)`; returns the new value.
pub fn q_update(table: &mut QTable, sample: &TransitionSample, params: &LearningParams) -> Result<f64, QError> {
    if sample.state >= table.states() {
        return Err(QError::StateOutOfRange {
            state: sample.state,
            states: table.states(),
        });
    }
    if sample.action >= table.actions() {
        return Err(QError::ActionOutOfRange {
            action: sample.action,
            actions: table.actions(),
        });
    }
    if sample.next_state >= table.states() {
        return Err(QError::StateOutOfRange {
            state: sample.next_state,
            states: table.states(),
        });
    }
    if !sample.reward.is_finite() {
        return Err(QError::NonFiniteReward(sample.reward));
    }
    let bootstrap = if sample.terminal {
        0.0
    } else {
        table.max_value(sample.next_state)
    };
    let target = sample.reward + params.gamma * bootstrap;
    let old = table.get(sample.state, sample.action);
    let new = (1.0 - params.alpha) * old + params.alpha * target;
    table.set(sample.state, sample.action, new);
    Ok(new)
}

/// `argmax_a Q(s, a)` under the tie-break policy.
pub fn greedy_action(table: &QTable, state: usize, tiebreak: TieBreakPolicy) -> Result<usize, QError> {
    if state >= table.states() {
        return Err(QError::StateOutOfRange {
            state,
            states: table.states(),
        });
    }
    let mut ties = TieBreaker::new(tiebreak);
    Ok(ties.argmax(table.row(state)).expect("action_count ≥ 1"))
}

/// An explicit finite MDP: dense transition and reward tables plus terminal
/// flags. `transition[s][a][s′]` rows must be probability distributions;
/// `reward[s][a]` is the expected immediate reward. Terminal states absorb:
/// their outgoing values are never used because the bootstrap is cut there.
#[derive(Debug, Clone)]
pub struct TabularMdp {
    states: usize,
    actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    terminal: Vec<bool>,
}

impl TabularMdp {
    pub fn new(
        states: usize,
        actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        terminal: Vec<bool>,
    ) -> Result<Self, QError> {
        if states == 0 || actions == 0 {
            return Err(QError::EmptyTable { states, actions });
        }
        assert_eq!(transition.len(), states * actions * states, "transition table shape");
        assert_eq!(reward.len(), states * actions, "reward table shape");
        assert_eq!(terminal.len(), states, "terminal flag shape");
        let mdp = TabularMdp {
            states,
            actions,
            transition,
            reward,
            terminal,
        };
        for s in 0..states {
            for a in 0..actions {
                let row = mdp.transition_row(s, a);
                let mut sum = 0.0;
                for &p in row {
                    if !p.is_finite() || p < 0.0 {
                        return Err(QError::InvalidProbability { state: s, action: a });
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(QError::NonStochasticRow { state: s, action: a, sum });
                }
            }
        }
        Ok(mdp)
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn terminal(&self, state: usize) -> bool {
        self.terminal[state]
    }

    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.reward[state * self.actions + action]
    }

    fn transition_row(&self, state: usize, action: usize) -> &[f64] {
        let base = (state * self.actions + action) * self.states;
        &self.transition[base..base + self.states]
    }
}

/// Synchronous value iteration to the optimal action-value function:
/// sweeps `Q(s,a) = R(s,a) + γ·Σ_{s′} T(s,a,s′)·max_{a′} Q(s′,a′)` until the
/// sup-norm change is below `tolerance` (terminal states keep Q = 0 beyond
/// the immediate reward's contribution from their predecessors).
pub fn value_iteration(mdp: &TabularMdp, gamma: f64, tolerance: f64) -> Result<QTable, QError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(QError::InvalidGamma(gamma));
    }
    if !(tolerance > 0.0) {
        return Err(QError::InvalidTolerance(tolerance));
    }
    let mut q = QTable::zeros(mdp.states(), mdp.actions())?;
    loop {
        let snapshot = q.clone();
        let mut delta: f64 = 0.0;
        for s in 0..mdp.states() {
            for a in 0..mdp.actions() {
                let value = if mdp.terminal(s) {
                    // No decisions are taken in a terminal state; pinning its
                    // row to zero implements the cut bootstrap.
                    0.0
                } else {
                    let mut expected = 0.0;
                    for (s2, &p) in mdp.transition_row(s, a).iter().enumerate() {
                        if p > 0.0 {
                            let bootstrap = if mdp.terminal(s2) { 0.0 } else { snapshot.max_value(s2) };
                            expected += p * bootstrap;
                        }
                    }
                    mdp.reward(s, a) + gamma * expected
                };
                let change = (value - snapshot.get(s, a)).abs();
                if change > delta {
                    delta = change;
                }
                q.set(s, a, value);
            }
        }
        if delta < tolerance {
            return Ok(q);
        }
    }
}
