//! The ensemble Q-learning agent: `k` independently initialized Q-heads act
//! as voters, a committee election aggregates their ballots each step, and
//! the agent samples uniformly from the winning committee. The five classic
//! single-winner ensemble policies are provided alongside as reference
//! implementations — each coincides with a committee rule at committee size
//! one, which the property suites verify.

use std::io::{BufRead, Write};

use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;
use thiserror::Error;

use crate::qlearn::{greedy_action, q_update, LearningParams, QError, QTable, TransitionSample};
use crate::seeding::{derive_seed_indexed, seeded_rng, Rng};
use crate::tie::{TieBreakPolicy, TieBreaker};
use crate::vote::{
    elect_threshold, elect_topk, rank_positions, Committee, ScoringRule, UtilityProfile, VoteError,
};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("ensemble needs at least one head")]
    NoHeads,
    #[error("all heads must share dimensions; head {head} is {got_states}×{got_actions}, expected {states}×{actions}")]
    MixedHeadShapes {
        head: usize,
        got_states: usize,
        got_actions: usize,
        states: usize,
        actions: usize,
    },
    #[error("update mask probability must be in [0, 1], got {0}")]
    InvalidMaskProbability(f64),
    #[error("init scale must be finite and non-negative, got {0}")]
    InvalidInitScale(f64),
    #[error("`{0}` is not a classic single-winner policy; use `election_committee`/`act` for the committee policy")]
    NotAClassicPolicy(&'static str),
    #[error("ensemble checkpoint line {line}: {message}")]
    MalformedCheckpoint { line: usize, message: String },
    #[error(transparent)]
    Vote(#[from] VoteError),
    #[error(transparent)]
    Q(#[from] QError),
}

/// How Q-rows are turned into ballots: raw action values, or a
/// softmax-normalized probability row (temperature 1, max-subtracted for
/// stability).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityMode {
    Raw,
    Softmax,
}

/// The agent's action-selection mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Plurality over the heads' greedy actions.
    MajorityVoting,
    /// Argmax of summed rank preferences `|A| − pos^i(a)`.
    RankVoting,
    /// Greedy on the mean of the heads' Q-rows.
    Average,
    /// Greedy on one per-episode sampled head.
    Bootstrapped,
    /// Sample from the mean of the heads' softmax rows.
    BoltzmannAddition,
    /// Elect a committee by `rule` with satisfaction threshold `s_thresh`,
    /// then sample uniformly from it. For the lottery rule the designated
    /// voter is the current bootstrap head (any configured index is
    /// superseded at election time).
    CommitteeRule { rule: ScoringRule, s_thresh: f64 },
}

impl PolicyKind {
    fn classic_name(&self) -> &'static str {
        match self {
            PolicyKind::MajorityVoting => "majority",
            PolicyKind::RankVoting => "rank",
            PolicyKind::Average => "average",
            PolicyKind::Bootstrapped => "bootstrapped",
            PolicyKind::BoltzmannAddition => "boltzmann",
            PolicyKind::CommitteeRule { .. } => "committee",
        }
    }
}

/// What a policy evaluation yields: a concrete action (deterministic
/// policies) or a full action distribution (Boltzmann addition).
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyDecision {
    Action(usize),
    Distribution(Vec<f64>),
}

/// Construction parameters for [`EnsembleAgent::new`].
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub heads: usize,
    pub states: usize,
    pub actions: usize,
    pub policy: PolicyKind,
    pub params: LearningParams,
    pub tiebreak: TieBreakPolicy,
    pub utility_mode: UtilityMode,
    /// Per-head Bernoulli update probability; 1.0 = every head updates on
    /// every transition (the default), smaller values train heads on
    /// different transition subsets.
    pub update_mask_p: f64,
    /// Heads start i.i.d. Uniform(−scale, scale).
    pub init_scale: f64,
    /// Base seed; the head-init, exploration, and mask streams are derived
    /// from it.
    pub seed: u64,
}

/// `k` Q-heads + an action-selection policy + exploration state.
pub struct EnsembleAgent {
    heads: Vec<QTable>,
    policy: PolicyKind,
    params: LearningParams,
    tiebreak: TieBreakPolicy,
    utility_mode: UtilityMode,
    update_mask_p: f64,
    bootstrap_head: usize,
    action_rng: Rng,
    mask_rng: Rng,
}

fn softmax_row(row: &[f64]) -> Vec<f64> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&q| (q - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl EnsembleAgent {
    /// Builds an agent with freshly initialized heads. Head `i`'s init
    /// stream, the exploration stream, and the update-mask stream are all
    /// derived independently from `config.seed`, so e.g. enabling the mask
    /// never shifts the exploration draws.
    pub fn new(config: &EnsembleConfig) -> Result<Self, EnsembleError> {
        if config.heads == 0 {
            return Err(EnsembleError::NoHeads);
        }
        if !config.init_scale.is_finite() || config.init_scale < 0.0 {
            return Err(EnsembleError::InvalidInitScale(config.init_scale));
        }
        let mut heads = Vec::with_capacity(config.heads);
        for i in 0..config.heads {
            let mut rng = Rng::seed_from_u64(derive_seed_indexed(config.seed, "head-init", i as u64));
            heads.push(QTable::uniform_init(
                config.states,
                config.actions,
                config.init_scale,
                &mut rng,
            )?);
        }
        Self::from_heads(
            heads,
            config.policy,
            config.params,
            config.tiebreak,
            config.utility_mode,
            config.update_mask_p,
            config.seed,
        )
    }

    /// Wraps pre-built heads (used by tests and checkpoint loading). All
    /// heads must share dimensions.
    pub fn from_heads(
        heads: Vec<QTable>,
        policy: PolicyKind,
        params: LearningParams,
        tiebreak: TieBreakPolicy,
        utility_mode: UtilityMode,
        update_mask_p: f64,
        seed: u64,
    ) -> Result<Self, EnsembleError> {
        if heads.is_empty() {
            return Err(EnsembleError::NoHeads);
        }
        let states = heads[0].states();
        let actions = heads[0].actions();
        for (i, h) in heads.iter().enumerate() {
            if h.states() != states || h.actions() != actions {
                return Err(EnsembleError::MixedHeadShapes {
                    head: i,
                    got_states: h.states(),
                    got_actions: h.actions(),
                    states,
                    actions,
                });
            }
        }
        if !(0.0..=1.0).contains(&update_mask_p) {
            return Err(EnsembleError::InvalidMaskProbability(update_mask_p));
        }
        if let PolicyKind::CommitteeRule { s_thresh, .. } = policy {
            if !s_thresh.is_finite() || s_thresh < 0.0 {
                return Err(EnsembleError::Vote(VoteError::InvalidThreshold { value: s_thresh }));
            }
        }
        Ok(EnsembleAgent {
            heads,
            policy,
            params,
            tiebreak,
            utility_mode,
            update_mask_p,
            bootstrap_head: 0,
            action_rng: seeded_rng(seed, "act"),
            mask_rng: seeded_rng(seed, "update-mask"),
        })
    }

    pub fn heads(&self) -> &[QTable] {
        &self.heads
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    pub fn states(&self) -> usize {
        self.heads[0].states()
    }

    pub fn actions(&self) -> usize {
        self.heads[0].actions()
    }

    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    pub fn params(&self) -> &LearningParams {
        &self.params
    }

    /// The per-episode head ψ driving the Bootstrapped policy and the
    /// lottery rule's mask.
    pub fn bootstrap_head(&self) -> usize {
        self.bootstrap_head
    }

    /// The ballots the heads cast at `state`: row `i` is head `i`'s Q-row,
    /// raw or softmax-normalized per the configured mode.
    pub fn utilities(&self, state: usize) -> UtilityProfile {
        let rows: Vec<Vec<f64>> = self
            .heads
            .iter()
            .map(|h| match self.utility_mode {
                UtilityMode::Raw => h.row(state).to_vec(),
                UtilityMode::Softmax => softmax_row(h.row(state)),
            })
            .collect();
        UtilityProfile::from_rows(&rows).expect("head rows form a valid profile")
    }

    /// Runs the committee election at `state` for a `CommitteeRule` policy:
    /// the threshold election for every rule except Lottery, which elects
    /// the masked voter's single winner (the mask being the current
    /// bootstrap head). Pure — no agent state changes, no randomness beyond
    /// the tie-break policy.
    pub fn election_committee(&self, state: usize) -> Result<Committee, EnsembleError> {
        let PolicyKind::CommitteeRule { rule, s_thresh } = self.policy else {
            return Err(EnsembleError::NotAClassicPolicy(self.policy.classic_name()));
        };
        let profile = self.utilities(state);
        let committee = match rule {
            ScoringRule::Lottery { .. } => elect_topk(
                ScoringRule::Lottery { voter: self.bootstrap_head },
                &profile,
                1,
                self.tiebreak,
            )?,
            rule => elect_threshold(rule, &profile, s_thresh, self.tiebreak)?,
        };
        Ok(committee)
    }

    /// Evaluates one of the five classic single-winner policies at `state`,
    /// bypassing the election machinery entirely (these are the reference
    /// implementations the committee rules are tested against).
    pub fn classic_policy(&self, kind: PolicyKind, state: usize) -> Result<PolicyDecision, EnsembleError> {
        let actions = self.actions();
        let mut ties = TieBreaker::new(self.tiebreak);
        match kind {
            PolicyKind::MajorityVoting => {
                let mut votes = vec![0.0f64; actions];
                for head in &self.heads {
                    votes[greedy_action(head, state, self.tiebreak)?] += 1.0;
                }
                Ok(PolicyDecision::Action(ties.argmax(&votes).unwrap()))
            }
            PolicyKind::RankVoting => {
                // Cumulative preference Σ_i (|A| − pos^i(a)) from each head's
                // Q-ranking.
                let rows: Vec<Vec<f64>> = self.heads.iter().map(|h| h.row(state).to_vec()).collect();
                let profile = UtilityProfile::from_rows(&rows).expect("valid profile");
                let mut pref = vec![0.0f64; actions];
                for i in 0..self.heads.len() {
                    let pos = rank_positions(&profile, i)?;
                    for a in 0..actions {
                        pref[a] += (actions - pos[a]) as f64;
                    }
                }
                Ok(PolicyDecision::Action(ties.argmax(&pref).unwrap()))
            }
            PolicyKind::Average => {
                let k = self.heads.len() as f64;
                let mut mean = vec![0.0f64; actions];
                for a in 0..actions {
                    let mut sum = 0.0;
                    for head in &self.heads {
                        sum += head.get(state, a);
                    }
                    mean[a] = sum / k;
                }
                Ok(PolicyDecision::Action(ties.argmax(&mean).unwrap()))
            }
            PolicyKind::Bootstrapped => Ok(PolicyDecision::Action(greedy_action(
                &self.heads[self.bootstrap_head],
                state,
                self.tiebreak,
            )?)),
            PolicyKind::BoltzmannAddition => {
                let k = self.heads.len() as f64;
                let mut dist = vec![0.0f64; actions];
                for head in &self.heads {
                    for (a, p) in softmax_row(head.row(state)).into_iter().enumerate() {
                        dist[a] += p;
                    }
                }
                for p in &mut dist {
                    *p /= k;
                }
                Ok(PolicyDecision::Distribution(dist))
            }
            PolicyKind::CommitteeRule { .. } => Err(EnsembleError::NotAClassicPolicy("committee")),
        }
    }

    /// Chooses the step-`t` action at `state`: with probability `ε(t)`
    /// uniform over all actions (no election is run on exploration steps);
    /// otherwise per the configured policy — committee policies sample
    /// uniformly from the elected committee, Boltzmann addition samples its
    /// distribution, the other classics act deterministically.
    pub fn act(&mut self, state: usize, t: u64) -> Result<usize, EnsembleError> {
        let epsilon = self.params.epsilon.epsilon_at(t);
        if self.action_rng.gen::<f64>() < epsilon {
            return Ok(self.action_rng.gen_range(0..self.actions()));
        }
        match self.policy {
            PolicyKind::CommitteeRule { .. } => {
                let committee = self.election_committee(state)?;
                let pick = self.action_rng.gen_range(0..committee.len());
                Ok(committee.members()[pick])
            }
            PolicyKind::BoltzmannAddition => {
                let PolicyDecision::Distribution(dist) = self.classic_policy(self.policy, state)? else {
                    unreachable!("Boltzmann addition yields a distribution");
                };
                let draw: f64 = self.action_rng.gen();
                let mut acc = 0.0;
                for (a, p) in dist.iter().enumerate() {
                    acc += p;
                    if draw < acc {
                        return Ok(a);
                    }
                }
                Ok(dist.len() - 1) // float dust: the tail absorbs
            }
            kind => {
                let PolicyDecision::Action(a) = self.classic_policy(kind, state)? else {
                    unreachable!("deterministic policies yield actions");
                };
                Ok(a)
            }
        }
    }

    /// Feeds one transition to the heads: every head applies the one-step
    /// Q-update, or — when the Bernoulli update mask is configured with
    /// p < 1 — each head updates independently with probability p.
    pub fn observe(&mut self, sample: &TransitionSample) -> Result<(), EnsembleError> {
        if self.update_mask_p >= 1.0 {
            for head in &mut self.heads {
                q_update(head, sample, &self.params)?;
            }
        } else {
            for head in &mut self.heads {
                if self.mask_rng.gen::<f64>() < self.update_mask_p {
                    q_update(head, sample, &self.params)?;
                }
            }
        }
        Ok(())
    }

    /// Resamples the bootstrap head ψ uniformly; call at episode boundaries
    /// only (ψ is constant within an episode by contract).
    pub fn end_episode(&mut self, rng: &mut Rng) {
        self.bootstrap_head = rng.gen_range(0..self.heads.len());
    }

    /// Writes all heads as one versioned checkpoint.
    pub fn save_heads<W: Write>(&self, mut out: W) -> Result<(), EnsembleError> {
        writeln!(out, "ensemble 1").map_err(QError::Io)?;
        writeln!(out, "{}", self.heads.len()).map_err(QError::Io)?;
        for head in &self.heads {
            head.write_to(&mut out)?;
        }
        Ok(())
    }

    /// Replaces the agent's heads with a checkpoint written by
    /// [`EnsembleAgent::save_heads`]. Head count and dimensions must match
    /// the agent's.
    pub fn load_heads<R: BufRead>(&mut self, mut reader: R) -> Result<(), EnsembleError> {
        let mut header = String::new();
        reader.read_line(&mut header).map_err(QError::Io)?;
        if header.trim() != "ensemble 1" {
            return Err(EnsembleError::MalformedCheckpoint {
                line: 1,
                message: format!("expected `ensemble 1` header, got `{}`", header.trim()),
            });
        }
        let mut count_line = String::new();
        reader.read_line(&mut count_line).map_err(QError::Io)?;
        let count: usize = count_line
            .trim()
            .parse()
            .map_err(|_| EnsembleError::MalformedCheckpoint {
                line: 2,
                message: format!("expected head count, got `{}`", count_line.trim()),
            })?;
        if count != self.heads.len() {
            return Err(EnsembleError::MalformedCheckpoint {
                line: 2,
                message: format!("checkpoint has {count} heads, agent has {}", self.heads.len()),
            });
        }
        let mut heads = Vec::with_capacity(count);
        for i in 0..count {
            let head = QTable::read_from(&mut reader)?;
            if head.states() != self.states() || head.actions() != self.actions() {
                return Err(EnsembleError::MixedHeadShapes {
                    head: i,
                    got_states: head.states(),
                    got_actions: head.actions(),
                    states: self.states(),
                    actions: self.actions(),
                });
            }
            heads.push(head);
        }
        self.heads = heads;
        Ok(())
    }
}
