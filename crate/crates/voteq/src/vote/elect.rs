//! Greedy and exhaustive committee elections.

use crate::tie::{TieBreakPolicy, TieBreaker};

use super::score::{score_with_positions, validate_rule, PositionMatrix};
use super::{Committee, ScoringRule, UtilityProfile, VoteError};

/// Committees to enumerate at most in [`elect_bruteforce`].
const BRUTE_FORCE_CAP: u128 = 1_000_000;

/// How the greedy loop ranks a candidate when deciding who to seat next.
///
/// Every rule except Bloc scores a member independently of the committee's
/// eventual size, so "satisfaction of `W ∪ {a}`" ranks candidates the same
/// way at every step and one selection strategy serves both election modes.
/// Bloc's satisfaction counts members inside each voter's top-`|W|`, which
/// moves as the committee grows: a fixed-size election must rank by the
/// target size's approval weight (that is what makes greedy exact — the
/// total is then additive over members), while the threshold election ranks
/// by the size the committee is about to have, exactly as the adaptive loop
/// evaluates `Σ_i f(μ^i, W ∪ {a})`.
enum BlocHorizon {
    /// Fixed-size election: weigh by the final committee size.
    TargetSize(usize),
    /// Adaptive election: weigh by the size after the pending insertion.
    Growing,
}

struct GreedyElection<'a> {
    rule: ScoringRule,
    profile: &'a UtilityProfile,
    pos: Option<PositionMatrix>,
    bloc_horizon: BlocHorizon,
    members: Vec<usize>,
    remaining: Vec<usize>,
    /// Per-voter best (smallest) position over the seated members; drives the
    /// Plurality and Chamberlin–Courant marginals.
    best_pos: Vec<usize>,
    /// The masked voter's best utility so far (Lottery).
    lottery_best: f64,
}

impl<'a> GreedyElection<'a> {
    fn new(rule: ScoringRule, profile: &'a UtilityProfile, bloc_horizon: BlocHorizon) -> Self {
        let needs_positions = matches!(
            rule,
            ScoringRule::Plurality
                | ScoringRule::Bloc
                | ScoringRule::ChamberlinCourant
                | ScoringRule::Borda
        );
        let pos = needs_positions.then(|| PositionMatrix::build(profile));
        GreedyElection {
            rule,
            profile,
            pos,
            bloc_horizon,
            members: Vec::new(),
            remaining: (0..profile.candidates()).collect(),
            best_pos: vec![profile.candidates() + 1; profile.voters()],
            lottery_best: f64::NEG_INFINITY,
        }
    }

    /// Ranking key for seating candidate `a` next: any strictly increasing
    /// function of `Σ_i f(μ^i, W ∪ {a})` (terms constant across candidates
    /// may be dropped), so the argmax matches the full marginal evaluation.
    fn key(&self, a: usize) -> f64 {
        let k = self.profile.voters();
        let m = self.profile.candidates();
        match self.rule {
            ScoringRule::Plurality => {
                let pos = self.pos.as_ref().unwrap();
                // Each voter has a unique top candidate, so coverage is
                // additive: newly covered voters = those whose top is `a`.
                (0..k)
                    .filter(|&i| self.best_pos[i] > 1 && pos.at(i, a) == 1)
                    .count() as f64
            }
            ScoringRule::Bloc => {
                let pos = self.pos.as_ref().unwrap();
                let l = match self.bloc_horizon {
                    BlocHorizon::TargetSize(n) => n,
                    BlocHorizon::Growing => self.members.len() + 1,
                };
                // The seated members' contribution under horizon `l` is the
                // same for every candidate; rank by a's approval weight.
                (0..k).filter(|&i| pos.at(i, a) <= l).count() as f64
            }
            ScoringRule::ChamberlinCourant => {
                let pos = self.pos.as_ref().unwrap();
                (0..k)
                    .map(|i| (m - self.best_pos[i].min(pos.at(i, a))) as f64)
                    .sum()
            }
            ScoringRule::Borda => {
                let pos = self.pos.as_ref().unwrap();
                (0..k).map(|i| (m - pos.at(i, a)) as f64).sum()
            }
            ScoringRule::MajorityJudgment => (0..k).map(|i| self.profile.utility(i, a)).sum(),
            ScoringRule::Lottery { voter } => self.lottery_best.max(self.profile.utility(voter, a)),
        }
    }

    /// Seats the argmax candidate and returns the committee's recomputed
    /// total satisfaction.
    fn seat_next(&mut self, ties: &mut TieBreaker) -> f64 {
        let winner = ties
            .argmax_by(self.remaining.iter().copied(), |a| self.key(a))
            .expect("greedy loop never runs with an empty candidate pool");
        self.remaining.retain(|&a| a != winner);
        self.members.push(winner);
        if let Some(pos) = &self.pos {
            for i in 0..self.profile.voters() {
                let p = pos.at(i, winner);
                if p < self.best_pos[i] {
                    self.best_pos[i] = p;
                }
            }
        }
        if let ScoringRule::Lottery { voter } = self.rule {
            self.lottery_best = self.lottery_best.max(self.profile.utility(voter, winner));
        }
        // Canonical recomputation: the running score must match a
        // from-scratch `score_committee` bit-for-bit.
        score_with_positions(self.rule, self.profile, self.pos.as_ref(), &self.members)
    }

    fn into_committee(self, score: f64) -> Committee {
        Committee::new_unchecked(self.members, score)
    }
}

/// Elects a committee of exactly `n` members by greedy selection: repeatedly
/// seats the candidate maximizing the committee's total satisfaction.
///
/// The result is the exact optimum for Plurality, Bloc, Borda, and Majority
/// Judgment (their totals are additive over members at a fixed size) and at
/// least `1 − 1/e` of the optimum for Chamberlin–Courant. The lottery rule
/// is single-winner only (`n = 1`).
pub fn elect_topk(
    rule: ScoringRule,
    profile: &UtilityProfile,
    n: usize,
    tiebreak: TieBreakPolicy,
) -> Result<Committee, VoteError> {
    validate_rule(rule, profile)?;
    let m = profile.candidates();
    if n < 1 || n > m {
        return Err(VoteError::SizeOutOfRange { n, max: m });
    }
    if matches!(rule, ScoringRule::Lottery { .. }) && n > 1 {
        return Err(VoteError::LotteryCommitteeSize { requested: n });
    }
    let mut election = GreedyElection::new(rule, profile, BlocHorizon::TargetSize(n));
    let mut ties = TieBreaker::new(tiebreak);
    let mut score = 0.0;
    for _ in 0..n {
        score = election.seat_next(&mut ties);
    }
    Ok(election.into_committee(score))
}

/// Elects a committee of adaptive size: starting empty, repeatedly seats the
/// argmax candidate and recomputes the total satisfaction `S`, stopping once
/// `S > s_thresh` or every candidate is seated. Always returns at least one
/// member — a first member already beyond the threshold is still seated.
///
/// With `s_thresh = 0` this matches `elect_topk(rule, profile, 1, tiebreak)`
/// whenever the winner's score is positive; with `s_thresh = +inf` it seats
/// the whole candidate set. The lottery rule only supports
/// threshold 0 and delegates to exactly that single-winner election (its
/// satisfaction is the masked voter's raw utility, which may legitimately be
/// ≤ 0; letting the adaptive loop continue on a negative score would seat the
/// whole candidate set instead of the masked voter's favorite).
pub fn elect_threshold(
    rule: ScoringRule,
    profile: &UtilityProfile,
    s_thresh: f64,
    tiebreak: TieBreakPolicy,
) -> Result<Committee, VoteError> {
    validate_rule(rule, profile)?;
    // +infinity is a legal degenerate threshold (never satisfied, so the
    // whole candidate set is seated); NaN and negatives are not.
    if s_thresh.is_nan() || s_thresh < 0.0 {
        return Err(VoteError::InvalidThreshold { value: s_thresh });
    }
    if matches!(rule, ScoringRule::Lottery { .. }) {
        if s_thresh != 0.0 {
            return Err(VoteError::LotteryThreshold { threshold: s_thresh });
        }
        return elect_topk(rule, profile, 1, tiebreak);
    }
    let m = profile.candidates();
    let mut election = GreedyElection::new(rule, profile, BlocHorizon::Growing);
    let mut ties = TieBreaker::new(tiebreak);
    loop {
        let score = election.seat_next(&mut ties);
        if election.members.len() == m || score > s_thresh {
            return Ok(election.into_committee(score));
        }
    }
}

fn combinations(m: usize, n: usize) -> u128 {
    // C(m, n) with early saturation against the enumeration cap.
    let n = n.min(m - n);
    let mut result: u128 = 1;
    for i in 0..n {
        result = result.saturating_mul((m - i) as u128) / (i as u128 + 1);
        if result > BRUTE_FORCE_CAP * 2 {
            return result;
        }
    }
    result
}

/// Exhaustively enumerates every `n`-subset and returns the best, breaking
/// score ties lexicographically on the sorted member list. The exact oracle
/// for the greedy elections; guarded against combinatorial blow-up.
pub fn elect_bruteforce(
    rule: ScoringRule,
    profile: &UtilityProfile,
    n: usize,
) -> Result<Committee, VoteError> {
    validate_rule(rule, profile)?;
    let m = profile.candidates();
    if n < 1 || n > m {
        return Err(VoteError::SizeOutOfRange { n, max: m });
    }
    let total = combinations(m, n);
    if total > BRUTE_FORCE_CAP {
        return Err(VoteError::TooManyCommittees {
            combinations: total,
            n,
            candidates: m,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let needs_positions = !matches!(rule, ScoringRule::MajorityJudgment | ScoringRule::Lottery { .. });
    let pos = needs_positions.then(|| PositionMatrix::build(profile));

    // Lexicographic combination walk; the first subset seen at any score is
    // the lexicographically smallest, so strict improvement implements the
    // tie-break.
    let mut members: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let score = score_with_positions(rule, profile, pos.as_ref(), &members);
        match &best {
            Some((_, s)) if score <= *s => {}
            _ => best = Some((members.clone(), score)),
        }
        // Advance to the next combination in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                let (members, score) = best.unwrap();
                return Ok(Committee::new_unchecked(members, score));
            }
            i -= 1;
            if members[i] != i + m - n {
                break;
            }
        }
        members[i] += 1;
        for j in i + 1..n {
            members[j] = members[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> UtilityProfile {
        UtilityProfile::from_rows(&[
            vec![3.0, 2.0, 1.0],
            vec![3.0, 2.0, 1.0],
            vec![1.0, 2.0, 3.0],
        ])
        .unwrap()
    }

    const LOW: TieBreakPolicy = TieBreakPolicy::LowestIndex;

    #[test]
    fn topk_plurality_singleton() {
        let c = elect_topk(ScoringRule::Plurality, &p3(), 1, LOW).unwrap();
        assert_eq!(c.members(), &[0]);
        assert_eq!(c.score(), 2.0);
    }

    #[test]
    fn topk_ccr_pair() {
        // Pair scores: {a0,a1} = 5, {a0,a2} = 6, {a1,a2} = 4.
        let c = elect_topk(ScoringRule::ChamberlinCourant, &p3(), 2, LOW).unwrap();
        assert_eq!(c.members(), &[0, 2]);
        assert_eq!(c.score(), 6.0);
    }

    #[test]
    fn topk_borda_full_set() {
        let c = elect_topk(ScoringRule::Borda, &p3(), 3, LOW).unwrap();
        assert_eq!(c.sorted_members(), vec![0, 1, 2]);
    }

    #[test]
    fn topk_majority_judgment_pair() {
        let c = elect_topk(ScoringRule::MajorityJudgment, &p3(), 2, LOW).unwrap();
        assert_eq!(c.members(), &[0, 1]);
        assert_eq!(c.score(), 13.0);
    }

    #[test]
    fn topk_bloc_pair_is_exact() {
        // Top-2 approval weights: a0 = 2, a1 = 3, a2 = 1; pair scores
        // {a0,a1} = 5, {a0,a2} = 3, {a1,a2} = 4 — greedy must take {a1,a0}.
        let c = elect_topk(ScoringRule::Bloc, &p3(), 2, LOW).unwrap();
        assert_eq!(c.members(), &[1, 0]);
        assert_eq!(c.score(), 5.0);
        let brute = elect_bruteforce(ScoringRule::Bloc, &p3(), 2).unwrap();
        assert_eq!(brute.score(), c.score());
    }

    #[test]
    fn topk_bloc_target_size_beats_nested_greedy() {
        // The adaptive loop would seat x first (top-1 weight 3 vs 2) and end
        // at {x, y} = 8; the optimal pair is {y, z} = 9. The fixed-size
        // election must find it.
        let profile = UtilityProfile::from_rows(&[
            vec![3.0, 2.0, 1.0],
            vec![3.0, 2.0, 1.0],
            vec![3.0, 1.0, 2.0],
            vec![1.0, 3.0, 2.0],
            vec![1.0, 3.0, 2.0],
            vec![1.0, 2.0, 3.0],
        ])
        .unwrap();
        let c = elect_topk(ScoringRule::Bloc, &profile, 2, LOW).unwrap();
        assert_eq!(c.sorted_members(), vec![1, 2]);
        assert_eq!(c.score(), 9.0);
        let brute = elect_bruteforce(ScoringRule::Bloc, &profile, 2).unwrap();
        assert_eq!(brute.score(), 9.0);
    }

    #[test]
    fn topk_lottery_single_winner_only() {
        let c = elect_topk(ScoringRule::Lottery { voter: 2 }, &p3(), 1, LOW).unwrap();
        assert_eq!(c.members(), &[2]);
        assert_eq!(c.score(), 3.0);
        assert_eq!(
            elect_topk(ScoringRule::Lottery { voter: 2 }, &p3(), 2, LOW),
            Err(VoteError::LotteryCommitteeSize { requested: 2 })
        );
    }

    #[test]
    fn topk_size_validation() {
        assert_eq!(
            elect_topk(ScoringRule::Borda, &p3(), 0, LOW),
            Err(VoteError::SizeOutOfRange { n: 0, max: 3 })
        );
        assert_eq!(
            elect_topk(ScoringRule::Borda, &p3(), 4, LOW),
            Err(VoteError::SizeOutOfRange { n: 4, max: 3 })
        );
    }

    #[test]
    fn threshold_judge_trace() {
        // Column sums g = [7, 6, 5]: seat a0 (S = 7 ≤ 10), seat a1
        // (S = 13 > 10), stop.
        let c = elect_threshold(ScoringRule::MajorityJudgment, &p3(), 10.0, LOW).unwrap();
        assert_eq!(c.members(), &[0, 1]);
        assert_eq!(c.score(), 13.0);
    }

    #[test]
    fn threshold_zero_returns_singleton() {
        let c = elect_threshold(ScoringRule::MajorityJudgment, &p3(), 0.0, LOW).unwrap();
        assert_eq!(c.members(), &[0]);
        assert_eq!(c.score(), 7.0);
    }

    #[test]
    fn threshold_unreachable_returns_full_set() {
        let c = elect_threshold(ScoringRule::MajorityJudgment, &p3(), 1e9, LOW).unwrap();
        assert_eq!(c.members(), &[0, 1, 2]);
        assert_eq!(c.score(), 18.0);
    }

    #[test]
    fn threshold_plurality_trace() {
        // Coverage: seat a0 (S = 2 ≤ 2.5), best marginal is a2 (covers voter
        // 2), S = 3 > 2.5, stop.
        let c = elect_threshold(ScoringRule::Plurality, &p3(), 2.5, LOW).unwrap();
        assert_eq!(c.members(), &[0, 2]);
        assert_eq!(c.score(), 3.0);
    }

    #[test]
    fn threshold_first_member_may_exceed() {
        let c = elect_threshold(ScoringRule::MajorityJudgment, &p3(), 3.0, LOW).unwrap();
        assert_eq!(c.members(), &[0]);
        assert_eq!(c.score(), 7.0);
    }

    #[test]
    fn threshold_validation() {
        assert_eq!(
            elect_threshold(ScoringRule::Borda, &p3(), -1.0, LOW),
            Err(VoteError::InvalidThreshold { value: -1.0 })
        );
        assert!(matches!(
            elect_threshold(ScoringRule::Borda, &p3(), f64::NAN, LOW),
            Err(VoteError::InvalidThreshold { .. })
        ));
    }

    #[test]
    fn infinite_threshold_seats_every_candidate() {
        // An unreachable threshold degenerates to the full candidate set.
        let c = elect_threshold(ScoringRule::MajorityJudgment, &p3(), f64::INFINITY, LOW).unwrap();
        assert_eq!(c.sorted_members(), vec![0, 1, 2]);
    }

    #[test]
    fn threshold_lottery_zero_only() {
        let c = elect_threshold(ScoringRule::Lottery { voter: 2 }, &p3(), 0.0, LOW).unwrap();
        assert_eq!(c.members(), &[2]);
        assert_eq!(
            elect_threshold(ScoringRule::Lottery { voter: 2 }, &p3(), 5.0, LOW),
            Err(VoteError::LotteryThreshold { threshold: 5.0 })
        );
    }

    #[test]
    fn threshold_lottery_negative_utilities_stay_single() {
        // The masked voter's best utility is negative; the adaptive loop
        // would never clear threshold 0 and would seat everyone. The
        // delegation to the single-winner election must prevent that.
        let profile = UtilityProfile::from_rows(&[vec![-5.0, -1.0, -3.0]]).unwrap();
        let c = elect_threshold(ScoringRule::Lottery { voter: 0 }, &profile, 0.0, LOW).unwrap();
        assert_eq!(c.members(), &[1]);
        assert_eq!(c.score(), -1.0);
    }

    #[test]
    fn bruteforce_examples() {
        let c = elect_bruteforce(ScoringRule::ChamberlinCourant, &p3(), 2).unwrap();
        assert_eq!(c.members(), &[0, 2]);
        assert_eq!(c.score(), 6.0);

        let c = elect_bruteforce(ScoringRule::MajorityJudgment, &p3(), 1).unwrap();
        assert_eq!(c.members(), &[0]);
        assert_eq!(c.score(), 7.0);

        // n = m: the single subset is the whole candidate set, any rule.
        for rule in [
            ScoringRule::Plurality,
            ScoringRule::Bloc,
            ScoringRule::ChamberlinCourant,
            ScoringRule::Borda,
            ScoringRule::MajorityJudgment,
            ScoringRule::Lottery { voter: 0 },
        ] {
            let c = elect_bruteforce(rule, &p3(), 3).unwrap();
            assert_eq!(c.members(), &[0, 1, 2]);
        }
    }

    #[test]
    fn bruteforce_tie_prefers_lexicographic() {
        // All singletons tie at score 0 for one indifferent voter under
        // Majority Judgment with equal utilities.
        let p = UtilityProfile::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let c = elect_bruteforce(ScoringRule::MajorityJudgment, &p, 1).unwrap();
        assert_eq!(c.members(), &[0]);
    }

    #[test]
    fn bruteforce_cap() {
        let p = UtilityProfile::from_flat(1, 60, vec![0.0; 60]).unwrap();
        match elect_bruteforce(ScoringRule::Borda, &p, 30) {
            Err(VoteError::TooManyCommittees { .. }) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn seeded_ties_are_reproducible() {
        let p = UtilityProfile::from_rows(&[vec![1.0, 1.0, 1.0, 1.0]]).unwrap();
        let t = TieBreakPolicy::SeededRandom { seed: 42 };
        let a = elect_topk(ScoringRule::MajorityJudgment, &p, 2, t).unwrap();
        let b = elect_topk(ScoringRule::MajorityJudgment, &p, 2, t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn committee_score_matches_recomputation() {
        for rule in [
            ScoringRule::Plurality,
            ScoringRule::Bloc,
            ScoringRule::ChamberlinCourant,
            ScoringRule::Borda,
            ScoringRule::MajorityJudgment,
        ] {
            for n in 1..=3 {
                let c = elect_topk(rule, &p3(), n, LOW).unwrap();
                let recomputed = super::super::score_committee(rule, &p3(), c.members()).unwrap();
                assert_eq!(c.score(), recomputed, "rule {rule:?} n {n}");
            }
        }
    }
}
