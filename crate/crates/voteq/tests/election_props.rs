//! Randomized invariant suite for the election core.
//!
//! Every check confronts the library with an independently written oracle:
//! closed-form single-winner formulas, a direct per-rule scorer, or the
//! exhaustive brute-force solver. Utility values are dyadic rationals
//! (multiples of 1/64) so additive scores are exact in floating point and
//! tie structure is genuinely exercised.

use proptest::prelude::*;
use voteq::tie::TieBreakPolicy;
use voteq::vote::{
    elect_bruteforce, elect_threshold, elect_topk, ScoringRule, UtilityProfile,
};

const LOW: TieBreakPolicy = TieBreakPolicy::LowestIndex;

/// 1-based preference positions for one ballot row; an equal-utility tie
/// goes to the lower candidate index.
fn positions(row: &[f64]) -> Vec<usize> {
    let m = row.len();
    (0..m)
        .map(|a| {
            1 + (0..m)
                .filter(|&b| row[b] > row[a] || (row[b] == row[a] && b < a))
                .count()
        })
        .collect()
}

/// Independent per-rule total satisfaction of a fixed member set, written
/// directly from the scoring table (no greedy machinery).
fn oracle_score(rule: ScoringRule, profile: &UtilityProfile, members: &[usize]) -> f64 {
    let m = profile.candidates();
    let mut total = 0.0;
    for i in 0..profile.voters() {
        let row = profile.row(i);
        let pos = positions(row);
        total += match rule {
            ScoringRule::Plurality => members
                .iter()
                .map(|&a| if pos[a] == 1 { 1.0 } else { 0.0 })
                .sum::<f64>(),
            ScoringRule::Bloc => members
                .iter()
                .map(|&a| if pos[a] <= members.len() { 1.0 } else { 0.0 })
                .sum::<f64>(),
            ScoringRule::Borda => members.iter().map(|&a| (m - pos[a]) as f64).sum::<f64>(),
            ScoringRule::ChamberlinCourant => members
                .iter()
                .map(|&a| (m - pos[a]) as f64)
                .fold(f64::NEG_INFINITY, f64::max),
            ScoringRule::MajorityJudgment => members.iter().map(|&a| row[a]).sum::<f64>(),
            ScoringRule::Lottery { voter } => {
                if i == voter {
                    members
                        .iter()
                        .map(|&a| row[a])
                        .fold(f64::NEG_INFINITY, f64::max)
                } else {
                    0.0
                }
            }
        };
    }
    total
}

/// Lowest-index argmax, the tie semantics every deterministic check uses.
fn argmax_low(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn dyadic_rows(
    voters: std::ops::RangeInclusive<usize>,
    candidates: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (voters, candidates).prop_flat_map(|(k, m)| {
        prop::collection::vec(
            prop::collection::vec((1u32..=64).prop_map(|v| v as f64 / 64.0), m),
            k,
        )
    })
}

/// Mixed-sign dyadic rows, the shape of raw Q-value ballots.
fn signed_rows(
    voters: std::ops::RangeInclusive<usize>,
    candidates: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (voters, candidates).prop_flat_map(|(k, m)| {
        prop::collection::vec(
            prop::collection::vec((-128i32..=128).prop_map(|v| v as f64 / 16.0), m),
            k,
        )
    })
}

const POSITIONAL: [ScoringRule; 4] = [
    ScoringRule::Plurality,
    ScoringRule::Bloc,
    ScoringRule::ChamberlinCourant,
    ScoringRule::Borda,
];

const ADDITIVE: [ScoringRule; 4] = [
    ScoringRule::Plurality,
    ScoringRule::Bloc,
    ScoringRule::Borda,
    ScoringRule::MajorityJudgment,
];

proptest! {
    /// Single-winner elections agree with the closed-form aggregation
    /// formulas: plurality and bloc with the top-vote count winner, CCR and
    /// Borda with the summed-rank winner, majority judgment with the mean
    /// utility winner.
    #[test]
    fn singleton_elections_match_the_classic_formulas(rows in dyadic_rows(1..=10, 2..=10)) {
        let profile = UtilityProfile::from_rows(&rows).unwrap();
        let m = profile.candidates();

        // Summed (not averaged) utilities: the argmax is the same, and the
        // dyadic sums stay exact, so ties are decided like the library's.
        let mut top_counts = vec![0.0; m];
        let mut rank_sums = vec![0.0; m];
        let mut util_sums = vec![0.0; m];
        for row in &rows {
            let pos = positions(row);
            top_counts[argmax_low(row)] += 1.0;
            for a in 0..m {
                rank_sums[a] += (m - pos[a]) as f64;
                util_sums[a] += row[a];
            }
        }

        for rule in [ScoringRule::Plurality, ScoringRule::Bloc] {
            let w = elect_topk(rule, &profile, 1, LOW).unwrap();
            prop_assert_eq!(w.members(), &[argmax_low(&top_counts)]);
        }
        for rule in [ScoringRule::ChamberlinCourant, ScoringRule::Borda] {
            let w = elect_topk(rule, &profile, 1, LOW).unwrap();
            prop_assert_eq!(w.members(), &[argmax_low(&rank_sums)]);
        }
        let w = elect_topk(ScoringRule::MajorityJudgment, &profile, 1, LOW).unwrap();
        prop_assert_eq!(w.members(), &[argmax_low(&util_sums)]);
    }

    /// On softmax ballots, successive winning-score increments of the
    /// utilitarian rule, divided by the voter count, recover the mean
    /// softmax mass of each action in preference order — and sum to one.
    #[test]
    fn utilitarian_increments_recover_softmax_means(rows in signed_rows(1..=8, 2..=8)) {
        let k = rows.len();
        let m = rows[0].len();
        let soft: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
                let z: f64 = exps.iter().sum();
                exps.iter().map(|e| e / z).collect()
            })
            .collect();
        let profile = UtilityProfile::from_rows(&soft).unwrap();

        let mut means: Vec<(f64, usize)> = (0..m)
            .map(|a| (soft.iter().map(|row| row[a]).sum::<f64>() / k as f64, a))
            .collect();
        means.sort_by(|(x, a), (y, b)| y.partial_cmp(x).unwrap().then(a.cmp(b)));

        let mut previous = 0.0;
        let mut increment_sum = 0.0;
        for (l, (mean, _)) in means.iter().enumerate() {
            let w = elect_topk(ScoringRule::MajorityJudgment, &profile, l + 1, LOW).unwrap();
            let increment = (w.score() - previous) / k as f64;
            prop_assert!(
                (increment - mean).abs() <= 1e-9,
                "size {}: increment {} vs mean {}",
                l + 1,
                increment,
                mean
            );
            increment_sum += increment;
            previous = w.score();
        }
        prop_assert!((increment_sum - 1.0).abs() <= 1e-9, "sum {}", increment_sum);
    }

    /// The lottery rule elects exactly the masked voter's greedy action,
    /// whatever everyone else's ballots say — including on negative values.
    #[test]
    fn lottery_elects_the_masked_voters_greedy_action(
        rows in signed_rows(1..=10, 2..=10),
        voter_pick in 0usize..10,
    ) {
        let profile = UtilityProfile::from_rows(&rows).unwrap();
        let voter = voter_pick % profile.voters();
        let rule = ScoringRule::Lottery { voter };
        let expected = argmax_low(profile.row(voter));

        let topk = elect_topk(rule, &profile, 1, LOW).unwrap();
        prop_assert_eq!(topk.members(), &[expected]);
        prop_assert_eq!(topk.score(), profile.row(voter)[expected]);

        let threshold = elect_threshold(rule, &profile, 0.0, LOW).unwrap();
        prop_assert_eq!(threshold.members(), &[expected]);
    }

    /// Greedy seating is exact for the additive rules (scores are dyadic,
    /// so equality is exact) and within the submodular 1 − 1/e factor of
    /// optimal for Chamberlin–Courant.
    #[test]
    fn greedy_matches_bruteforce_within_each_rules_guarantee(
        rows in dyadic_rows(1..=5, 2..=7),
        n_pick in 1usize..=7,
    ) {
        let profile = UtilityProfile::from_rows(&rows).unwrap();
        let n = 1 + (n_pick - 1) % profile.candidates();

        for rule in ADDITIVE {
            let greedy = elect_topk(rule, &profile, n, LOW).unwrap();
            let brute = elect_bruteforce(rule, &profile, n).unwrap();
            prop_assert_eq!(greedy.score(), brute.score(), "rule {}", rule.name());
        }
        let greedy = elect_topk(ScoringRule::ChamberlinCourant, &profile, n, LOW).unwrap();
        let brute = elect_bruteforce(ScoringRule::ChamberlinCourant, &profile, n).unwrap();
        prop_assert!(greedy.score() <= brute.score() + 1e-12);
        prop_assert!(
            greedy.score() >= (1.0 - (-1.0f64).exp()) * brute.score() - 1e-12,
            "greedy {} below the 1-1/e bound of optimum {}",
            greedy.score(),
            brute.score()
        );
    }

    /// Majority-judgment and Borda optima nest: each size-l committee is
    /// contained in the size-(l+1) committee.
    #[test]
    fn judgment_and_borda_committees_nest(rows in dyadic_rows(1..=8, 2..=8)) {
        let profile = UtilityProfile::from_rows(&rows).unwrap();
        for rule in [ScoringRule::MajorityJudgment, ScoringRule::Borda] {
            let mut previous: Vec<usize> = Vec::new();
            for l in 1..=profile.candidates() {
                let committee = elect_topk(rule, &profile, l, LOW).unwrap();
                let members = committee.sorted_members();
                for a in &previous {
                    prop_assert!(
                        members.contains(a),
                        "rule {}: size {} lost member {}",
                        rule.name(),
                        l,
                        a
                    );
                }
                previous = members;
            }
        }
    }

    /// A threshold election's seating order is a prefix of the full greedy
    /// seating order (bloc excluded: its scores depend on the target size).
    #[test]
    fn threshold_committees_prefix_the_greedy_order(
        rows in dyadic_rows(1..=6, 2..=8),
        raw_thresh in 0u32..400,
    ) {
        let profile = UtilityProfile::from_rows(&rows).unwrap();
        let s_thresh = raw_thresh as f64 / 16.0;
        for rule in [
            ScoringRule::Plurality,
            ScoringRule::ChamberlinCourant,
            ScoringRule::Borda,
            ScoringRule::MajorityJudgment,
        ] {
            let full = elect_topk(rule, &profile, profile.candidates(), LOW).unwrap();
            let adaptive = elect_threshold(rule, &profile, s_thresh, LOW).unwrap();
            prop_assert_eq!(
                adaptive.members(),
                &full.members()[..adaptive.len()],
                "rule {} threshold {}",
                rule.name(),
                s_thresh
            );
        }
    }

    /// Positional rules only read ballot orderings: any per-voter positive
    /// affine rescaling leaves the elected committee unchanged.
    #[test]
    fn positional_rules_ignore_ballot_rescaling(
        rows in dyadic_rows(1..=6, 2..=8),
        scales in prop::collection::vec((1u32..=8, -32i32..=32), 6),
        n_pick in 1usize..=8,
    ) {
        let rescaled: Vec<Vec<f64>> = rows
            .iter()
            .zip(scales.iter().cycle())
            .map(|(row, (a, b))| {
                row.iter()
                    .map(|u| *a as f64 / 4.0 * u + *b as f64 / 8.0)
                    .collect()
            })
            .collect();
        let profile = UtilityProfile::from_rows(&rows).unwrap();
        let transformed = UtilityProfile::from_rows(&rescaled).unwrap();
        let n = 1 + (n_pick - 1) % profile.candidates();

        for rule in POSITIONAL {
            let original = elect_topk(rule, &profile, n, LOW).unwrap();
            let shifted = elect_topk(rule, &transformed, n, LOW).unwrap();
            prop_assert_eq!(
                original.members(),
                shifted.members(),
                "rule {}",
                rule.name()
            );
        }
    }

    /// Reported committee scores equal the direct scoring-table formula
    /// applied to the member set.
    #[test]
    fn reported_scores_match_the_direct_formula(
        rows in dyadic_rows(1..=6, 2..=8),
        n_pick in 1usize..=8,
    ) {
        let profile = UtilityProfile::from_rows(&rows).unwrap();
        let n = 1 + (n_pick - 1) % profile.candidates();
        let rules = [
            ScoringRule::Plurality,
            ScoringRule::Bloc,
            ScoringRule::ChamberlinCourant,
            ScoringRule::Borda,
            ScoringRule::MajorityJudgment,
            ScoringRule::Lottery { voter: 0 },
        ];
        for rule in rules {
            if matches!(rule, ScoringRule::Lottery { .. }) && n > 1 {
                continue;
            }
            let committee = elect_topk(rule, &profile, n, LOW).unwrap();
            let direct = oracle_score(rule, &profile, committee.members());
            prop_assert_eq!(
                committee.score(),
                direct,
                "rule {} members {:?}",
                rule.name(),
                committee.members()
            );
        }
    }

    /// Seeded tie-breaking replays identically, and for additive rules any
    /// tie path lands on the same optimal score as the deterministic one.
    #[test]
    fn seeded_ties_replay_and_preserve_additive_scores(
        rows in dyadic_rows(1..=5, 2..=7),
        seed in 0u64..1000,
        n_pick in 1usize..=7,
    ) {
        let profile = UtilityProfile::from_rows(&rows).unwrap();
        let n = 1 + (n_pick - 1) % profile.candidates();
        let seeded = TieBreakPolicy::SeededRandom { seed };
        for rule in ADDITIVE {
            let first = elect_topk(rule, &profile, n, seeded).unwrap();
            let second = elect_topk(rule, &profile, n, seeded).unwrap();
            prop_assert_eq!(first.members(), second.members());
            prop_assert_eq!(first.score(), second.score());
            let deterministic = elect_topk(rule, &profile, n, LOW).unwrap();
            prop_assert_eq!(first.score(), deterministic.score(), "rule {}", rule.name());
        }
    }
}
