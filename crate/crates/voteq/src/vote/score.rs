//! Ballot positions and committee satisfaction scores.

use super::{ScoringRule, UtilityProfile, VoteError};

/// Returns voter `voter`'s candidate ranks `pos^i` as a permutation of
/// `1..=m`: higher utility means a smaller rank, and utility ties give the
/// lower candidate index the smaller rank.
pub fn rank_positions(profile: &UtilityProfile, voter: usize) -> Result<Vec<usize>, VoteError> {
    if voter >= profile.voters() {
        return Err(VoteError::VoterOutOfRange {
            voter,
            voters: profile.voters(),
        });
    }
    Ok(rank_row(profile.row(voter)))
}

fn rank_row(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    // Descending utility, ascending index on ties. Utilities are finite by
    // profile construction, so total ordering is safe.
    order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
    let mut pos = vec![0usize; row.len()];
    for (rank0, &candidate) in order.iter().enumerate() {
        pos[candidate] = rank0 + 1;
    }
    pos
}

/// All voters' positions, row-major, computed once per election.
pub(crate) struct PositionMatrix {
    pos: Vec<usize>,
    candidates: usize,
}

impl PositionMatrix {
    pub(crate) fn build(profile: &UtilityProfile) -> Self {
        let candidates = profile.candidates();
        let mut pos = Vec::with_capacity(profile.voters() * candidates);
        for i in 0..profile.voters() {
            pos.extend(rank_row(profile.row(i)));
        }
        PositionMatrix { pos, candidates }
    }

    /// `pos^i(a)`, 1-based.
    pub(crate) fn at(&self, voter: usize, candidate: usize) -> usize {
        self.pos[voter * self.candidates + candidate]
    }
}

fn validate_members(profile: &UtilityProfile, members: &[usize]) -> Result<(), VoteError> {
    if members.is_empty() {
        return Err(VoteError::EmptyCommittee);
    }
    let m = profile.candidates();
    let mut seen = vec![false; m];
    for &a in members {
        if a >= m {
            return Err(VoteError::CandidateOutOfRange {
                candidate: a,
                candidates: m,
            });
        }
        if seen[a] {
            return Err(VoteError::DuplicateMember { candidate: a });
        }
        seen[a] = true;
    }
    Ok(())
}

pub(crate) fn validate_rule(rule: ScoringRule, profile: &UtilityProfile) -> Result<(), VoteError> {
    if let ScoringRule::Lottery { voter } = rule {
        if voter >= profile.voters() {
            return Err(VoteError::VoterOutOfRange {
                voter,
                voters: profile.voters(),
            });
        }
    }
    Ok(())
}

/// Total satisfaction `Σ_i f(μ^i, W)` of the member set `W` under `rule`.
///
/// The committee must be non-empty with distinct, in-range members. This is
/// the single scoring path: elections recompute their final score through it,
/// so a `Committee`'s score always matches a from-scratch evaluation.
pub fn score_committee(
    rule: ScoringRule,
    profile: &UtilityProfile,
    members: &[usize],
) -> Result<f64, VoteError> {
    validate_rule(rule, profile)?;
    validate_members(profile, members)?;
    let needs_positions = matches!(
        rule,
        ScoringRule::Plurality | ScoringRule::Bloc | ScoringRule::ChamberlinCourant | ScoringRule::Borda
    );
    let pos = needs_positions.then(|| PositionMatrix::build(profile));
    Ok(score_with_positions(rule, profile, pos.as_ref(), members))
}

/// Scoring core shared with the election loops; `pos` must be provided for
/// the position-based rules. Summation is voter-major so every caller
/// produces bit-identical totals.
pub(crate) fn score_with_positions(
    rule: ScoringRule,
    profile: &UtilityProfile,
    pos: Option<&PositionMatrix>,
    members: &[usize],
) -> f64 {
    let m = profile.candidates();
    match rule {
        ScoringRule::Plurality => {
            let pos = pos.expect("plurality needs positions");
            let mut total = 0.0;
            for i in 0..profile.voters() {
                if members.iter().any(|&a| pos.at(i, a) == 1) {
                    total += 1.0;
                }
            }
            total
        }
        ScoringRule::Bloc => {
            let pos = pos.expect("bloc needs positions");
            let l = members.len();
            let mut total = 0.0;
            for i in 0..profile.voters() {
                total += members.iter().filter(|&&a| pos.at(i, a) <= l).count() as f64;
            }
            total
        }
        ScoringRule::ChamberlinCourant => {
            let pos = pos.expect("ccr needs positions");
            let mut total = 0.0;
            for i in 0..profile.voters() {
                let best = members.iter().map(|&a| pos.at(i, a)).min().unwrap();
                total += (m - best) as f64;
            }
            total
        }
        ScoringRule::Borda => {
            let pos = pos.expect("borda needs positions");
            let mut total = 0.0;
            for i in 0..profile.voters() {
                for &a in members {
                    total += (m - pos.at(i, a)) as f64;
                }
            }
            total
        }
        ScoringRule::MajorityJudgment => {
            let mut total = 0.0;
            for i in 0..profile.voters() {
                for &a in members {
                    total += profile.utility(i, a);
                }
            }
            total
        }
        ScoringRule::Lottery { voter } => {
            // Only the designated voter's satisfaction counts.
            members
                .iter()
                .map(|&a| profile.utility(voter, a))
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}
