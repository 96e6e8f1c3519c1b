//! Committee elections over Q-ensembles.
//!
//! An ensemble of `k` Q-learning heads is treated as an electorate: at each
//! state every head casts a cardinal ballot (its Q-row, raw or softmaxed), a
//! multi-winner voting rule elects a committee of actions, and the agent
//! samples uniformly from the committee. Classic ensemble policies (majority
//! voting, rank voting, average, Boltzmann addition, bootstrapped) are the
//! single-winner special cases.
//!
//! Module map:
//! - [`vote`] — utility profiles, committee scoring rules, greedy/threshold
//!   elections, and a brute-force oracle.
//! - [`qlearn`] — tabular Q-tables, the one-step update, value iteration, and
//!   checkpoint I/O.
//! - [`ensemble`] — the ensemble agent tying heads, rule, and exploration
//!   together, plus the classic baseline policies.
//! - [`env`] — the reward-at-the-ends corridor chain and four small grid-world
//!   tasks with exact tabular state encodings.
//! - [`harness`] — experiment configs, the seeded parallel runner, the EMA
//!   learning-curve metric, reports, and SVG plots.

pub mod ensemble;
pub mod env;
pub mod harness;
pub mod qlearn;
pub mod seeding;
pub mod tie;
pub mod vote;

pub use ensemble::{EnsembleAgent, EnsembleConfig, PolicyKind, UtilityMode};
pub use qlearn::{EpsilonSchedule, LearningParams, QTable};
pub use tie::TieBreakPolicy;
pub use vote::{Committee, ScoringRule, UtilityProfile};
