//! Tie-breaking for argmax decisions.
//!
//! Elections, greedy action selection, and the classic ensemble policies all
//! reduce to "argmax with ties". Ties are exact `f64` equality — scores are
//! ordinal constructs (rank counts, position sums) or raw utilities, and the
//! committee-monotonicity guarantees only hold when equal means equal.

use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;

use crate::seeding::Rng;

/// How equal-scoring alternatives are resolved.
///
/// `LowestIndex` is the deterministic default. `SeededRandom` draws from its
/// own ChaCha stream: the same seed replays the same sequence of tie
/// decisions, so elections stay reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreakPolicy {
    /// Pick the smallest index among the tied alternatives.
    LowestIndex,
    /// Pick uniformly among the tied alternatives from a seeded stream.
    SeededRandom { seed: u64 },
}

impl Default for TieBreakPolicy {
    fn default() -> Self {
        TieBreakPolicy::LowestIndex
    }
}

/// A stateful argmax helper carrying the tie-break stream.
///
/// One `TieBreaker` lives for the duration of one operation (an election, an
/// action choice); with `SeededRandom` the stream is re-seeded per operation,
/// so identical inputs yield identical decisions.
pub struct TieBreaker {
    rng: Option<Rng>,
}

impl TieBreaker {
    pub fn new(policy: TieBreakPolicy) -> Self {
        let rng = match policy {
            TieBreakPolicy::LowestIndex => None,
            TieBreakPolicy::SeededRandom { seed } => Some(Rng::seed_from_u64(seed)),
        };
        TieBreaker { rng }
    }

    /// Argmax of `score` over `indices`, ties per policy. Returns `None` only
    /// for an empty iterator. Scores must be non-NaN (comparison is `>`).
    pub fn argmax_by<I, F>(&mut self, indices: I, mut score: F) -> Option<usize>
    where
        I: IntoIterator<Item = usize>,
        F: FnMut(usize) -> f64,
    {
        let mut best: Option<f64> = None;
        let mut tied: Vec<usize> = Vec::new();
        for i in indices {
            let s = score(i);
            match best {
                None => {
                    best = Some(s);
                    tied.push(i);
                }
                Some(b) if s > b => {
                    best = Some(s);
                    tied.clear();
                    tied.push(i);
                }
                Some(b) if s == b => tied.push(i),
                Some(_) => {}
            }
        }
        if tied.is_empty() {
            return None;
        }
        Some(match &mut self.rng {
            // Ascending iteration order makes tied[0] the lowest index when
            // callers pass 0..n; callers with custom orders get first-seen.
            None => tied[0],
            Some(rng) => tied[rng.gen_range(0..tied.len())],
        })
    }

    /// Argmax over a slice of scores (indices `0..scores.len()`).
    pub fn argmax(&mut self, scores: &[f64]) -> Option<usize> {
        self.argmax_by(0..scores.len(), |i| scores[i])
    }
}
