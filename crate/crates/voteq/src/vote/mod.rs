//! Multi-winner committee elections over cardinal ballots.
//!
//! An election takes a `UtilityProfile` (one row of utilities per voter), a
//! `ScoringRule` assigning each voter a satisfaction `f(μ, W)` with any
//! candidate committee `W`, and returns the committee maximizing the total
//! satisfaction `Σ_i f(μ^i, W)`:
//!
//! - [`elect_topk`] — greedy selection of a fixed-size committee. Exact for
//!   the rules whose total satisfaction is additive over members (Plurality,
//!   Bloc at its target size, Borda, Majority Judgment); within `1 − 1/e` of
//!   optimal for Chamberlin–Courant (whose exact election is NP-complete, but
//!   whose satisfaction is monotone submodular).
//! - [`elect_threshold`] — grows the committee one argmax candidate at a time
//!   until the total satisfaction exceeds a threshold (or every candidate is
//!   seated), so committee size adapts to how contested the profile is.
//! - [`elect_bruteforce`] — exhaustive enumeration, the exact oracle the
//!   greedy elections are tested against.

mod elect;
mod score;

pub use elect::{elect_bruteforce, elect_threshold, elect_topk};
pub use score::{rank_positions, score_committee};

use thiserror::Error;

/// Errors from profile construction, scoring, and elections.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VoteError {
    #[error("profile needs at least one voter and one candidate")]
    EmptyProfile,
    #[error("profile row {row} has {got} utilities, expected {expected}")]
    RaggedProfile { row: usize, got: usize, expected: usize },
    #[error("utility for voter {voter}, candidate {candidate} is not finite")]
    NonFiniteUtility { voter: usize, candidate: usize },
    #[error("voter index {voter} out of range for {voters} voters")]
    VoterOutOfRange { voter: usize, voters: usize },
    #[error("candidate index {candidate} out of range for {candidates} candidates")]
    CandidateOutOfRange { candidate: usize, candidates: usize },
    #[error("committee is empty")]
    EmptyCommittee,
    #[error("candidate {candidate} appears twice in the committee")]
    DuplicateMember { candidate: usize },
    #[error("committee size {n} out of range 1..={max}")]
    SizeOutOfRange { n: usize, max: usize },
    #[error("threshold must be finite and non-negative, got {value}")]
    InvalidThreshold { value: f64 },
    #[error("the lottery rule needs a designated voter")]
    MissingLotteryVoter,
    #[error("the lottery rule elects single-winner committees only (requested size {requested})")]
    LotteryCommitteeSize { requested: usize },
    #[error("the lottery rule only supports threshold 0 (got {threshold})")]
    LotteryThreshold { threshold: f64 },
    #[error("{combinations} committees of size {n} from {candidates} candidates exceed the enumeration cap of {cap}")]
    TooManyCommittees {
        combinations: u128,
        n: usize,
        candidates: usize,
        cap: u128,
    },
    #[error("unknown scoring rule `{name}` (expected plurality|sntv, bloc, ccr, borda, judge|mj, or lottery)")]
    UnknownRule { name: String },
}

/// A `voters × candidates` matrix of finite utilities; row `i` is voter `i`'s
/// cardinal ballot.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityProfile {
    utilities: Vec<f64>,
    voters: usize,
    candidates: usize,
}

impl UtilityProfile {
    /// Builds a profile from per-voter rows. All rows must share one length
    /// and every entry must be finite.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, VoteError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(VoteError::EmptyProfile);
        }
        let candidates = rows[0].len();
        let mut utilities = Vec::with_capacity(rows.len() * candidates);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != candidates {
                return Err(VoteError::RaggedProfile {
                    row: i,
                    got: row.len(),
                    expected: candidates,
                });
            }
            for (a, &u) in row.iter().enumerate() {
                if !u.is_finite() {
                    return Err(VoteError::NonFiniteUtility { voter: i, candidate: a });
                }
                utilities.push(u);
            }
        }
        Ok(UtilityProfile {
            utilities,
            voters: rows.len(),
            candidates,
        })
    }

    /// Builds a profile from a row-major flat buffer.
    pub fn from_flat(voters: usize, candidates: usize, utilities: Vec<f64>) -> Result<Self, VoteError> {
        if voters == 0 || candidates == 0 {
            return Err(VoteError::EmptyProfile);
        }
        if utilities.len() != voters * candidates {
            return Err(VoteError::RaggedProfile {
                row: utilities.len() / candidates.max(1),
                got: utilities.len() % candidates.max(1),
                expected: candidates,
            });
        }
        for (idx, &u) in utilities.iter().enumerate() {
            if !u.is_finite() {
                return Err(VoteError::NonFiniteUtility {
                    voter: idx / candidates,
                    candidate: idx % candidates,
                });
            }
        }
        Ok(UtilityProfile {
            utilities,
            voters,
            candidates,
        })
    }

    pub fn voters(&self) -> usize {
        self.voters
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    /// Voter `i`'s utility for candidate `a`. Panics on out-of-range indices
    /// (callers validate against `voters()`/`candidates()`).
    pub fn utility(&self, voter: usize, candidate: usize) -> f64 {
        assert!(voter < self.voters && candidate < self.candidates);
        self.utilities[voter * self.candidates + candidate]
    }

    /// Voter `i`'s full ballot row.
    pub fn row(&self, voter: usize) -> &[f64] {
        assert!(voter < self.voters);
        &self.utilities[voter * self.candidates..(voter + 1) * self.candidates]
    }
}

/// The committee scoring rules.
///
/// Writing `pos^i(a)` for candidate `a`'s 1-based rank in voter `i`'s ballot
/// (see [`rank_positions`]) and `β^i(a) = m − pos^i(a)`, a voter's
/// satisfaction with committee `W` is:
///
/// | rule                | `f(μ^i, W)`                                      |
/// |---------------------|--------------------------------------------------|
/// | Plurality (SNTV)    | 1 if `W` contains voter `i`'s top candidate      |
/// | Bloc                | #`{a ∈ W: pos^i(a) ≤ \|W\|}`                     |
/// | Chamberlin–Courant  | `max_{a∈W} β^i(a)`                               |
/// | Borda               | `Σ_{a∈W} β^i(a)`                                 |
/// | Majority Judgment   | `Σ_{a∈W} μ^i(a)`                                 |
/// | Lottery             | `max_{a∈W} μ^i(a)` for the designated voter, 0 for everyone else |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoringRule {
    Plurality,
    Bloc,
    ChamberlinCourant,
    Borda,
    MajorityJudgment,
    /// Only the designated voter's ballot counts.
    Lottery { voter: usize },
}

impl ScoringRule {
    /// Canonical lowercase name (used by the CLI and config files).
    pub fn name(&self) -> &'static str {
        match self {
            ScoringRule::Plurality => "plurality",
            ScoringRule::Bloc => "bloc",
            ScoringRule::ChamberlinCourant => "ccr",
            ScoringRule::Borda => "borda",
            ScoringRule::MajorityJudgment => "judge",
            ScoringRule::Lottery { .. } => "lottery",
        }
    }

    /// Parses a rule name (with common synonyms); the lottery rule requires
    /// `lottery_voter`.
    pub fn parse(name: &str, lottery_voter: Option<usize>) -> Result<Self, VoteError> {
        let rule = match name.trim().to_ascii_lowercase().as_str() {
            "plurality" | "sntv" => ScoringRule::Plurality,
            "bloc" => ScoringRule::Bloc,
            "ccr" | "chamberlin-courant" | "chamberlincourant" => ScoringRule::ChamberlinCourant,
            "borda" => ScoringRule::Borda,
            "judge" | "mj" | "majority-judgment" | "majorityjudgment" => ScoringRule::MajorityJudgment,
            "lottery" => {
                let voter = lottery_voter.ok_or(VoteError::MissingLotteryVoter)?;
                ScoringRule::Lottery { voter }
            }
            other => {
                return Err(VoteError::UnknownRule {
                    name: other.to_string(),
                })
            }
        };
        Ok(rule)
    }
}

/// An elected committee: distinct candidate indices in the order the greedy
/// loop seated them (brute force seats in ascending index order), plus the
/// total satisfaction score, always recomputed from scratch on the final
/// member set.
#[derive(Debug, Clone, PartialEq)]
pub struct Committee {
    members: Vec<usize>,
    score: f64,
}

impl Committee {
    pub(crate) fn new_unchecked(members: Vec<usize>, score: f64) -> Self {
        Committee { members, score }
    }

    /// Members in insertion order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Members sorted ascending (for set comparisons and display).
    pub fn sorted_members(&self) -> Vec<usize> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }

    /// Total satisfaction `Σ_i f(μ^i, W)` of the member set.
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, candidate: usize) -> bool {
        self.members.contains(&candidate)
    }
}
