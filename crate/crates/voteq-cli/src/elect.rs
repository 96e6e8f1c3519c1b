//! The `elect` command: read a ballot file, run one election, print the
//! committee and its score.

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use voteq::harness::fmt_float;
use voteq::tie::TieBreakPolicy;
use voteq::vote::{elect_bruteforce, elect_threshold, elect_topk, ScoringRule, UtilityProfile};

#[derive(Args, Debug)]
pub struct ElectArgs {
    /// Ballot file: optional `key: value` header lines (rule, n, threshold,
    /// seed, lottery_voter) followed by one whitespace-separated utility row
    /// per voter; `#` starts a comment. Flags override file headers.
    pub ballots: PathBuf,
    /// Scoring rule: plurality|sntv, bloc, ccr, borda, judge, or lottery.
    #[arg(long)]
    pub rule: Option<String>,
    /// Committee size for a fixed-size election.
    #[arg(long)]
    pub n: Option<usize>,
    /// Satisfaction threshold for an adaptive-size election.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Seed for randomized tie-breaking (default: lowest index wins ties).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ballot row whose utilities count under the lottery rule.
    #[arg(long)]
    pub lottery_voter: Option<usize>,
    /// Solve by exhaustive enumeration instead of greedy seating
    /// (fixed-size elections only).
    #[arg(long)]
    pub exact: bool,
}

/// Header values and utility rows read from a ballot file.
#[derive(Debug, Default)]
struct BallotFile {
    rule: Option<String>,
    n: Option<usize>,
    threshold: Option<f64>,
    seed: Option<u64>,
    lottery_voter: Option<usize>,
    rows: Vec<Vec<f64>>,
}

fn parse_ballots(name: &str, text: &str) -> Result<BallotFile> {
    let mut out = BallotFile::default();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            let key = key.trim();
            let value = value.trim();
            if !out.rows.is_empty() {
                bail!("{name}:{lineno}: header `{key}` after the first utility row");
            }
            let bad =
                |err: String| anyhow!("{name}:{lineno}: bad `{key}` value `{value}`: {err}");
            match key {
                "rule" => out.rule = Some(value.to_string()),
                "n" => out.n = Some(value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
                "threshold" => {
                    out.threshold =
                        Some(value.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?)
                }
                "seed" => out.seed = Some(value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
                "lottery_voter" => {
                    out.lottery_voter =
                        Some(value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?)
                }
                other => bail!(
                    "{name}:{lineno}: unknown header `{other}` (expected rule, n, threshold, seed, or lottery_voter)"
                ),
            }
            continue;
        }
        let mut row = Vec::new();
        for token in line.split_whitespace() {
            let value: f64 = token
                .parse()
                .map_err(|_| anyhow!("{name}:{lineno}: `{token}` is not a number"))?;
            row.push(value);
        }
        out.rows.push(row);
    }
    Ok(out)
}

pub fn run(args: &ElectArgs) -> Result<()> {
    let text = fs::read_to_string(&args.ballots)
        .with_context(|| format!("cannot read ballot file `{}`", args.ballots.display()))?;
    let file_name = args.ballots.display().to_string();
    let ballots = parse_ballots(&file_name, &text)?;
    let profile = UtilityProfile::from_rows(&ballots.rows)
        .with_context(|| format!("{file_name}: invalid utility rows"))?;

    let rule_name = args
        .rule
        .clone()
        .or(ballots.rule)
        .ok_or_else(|| anyhow!("no rule given: pass --rule or add a `rule:` header line"))?;
    let rule = ScoringRule::parse(&rule_name, args.lottery_voter.or(ballots.lottery_voter))?;
    let tiebreak = match args.seed.or(ballots.seed) {
        Some(seed) => TieBreakPolicy::SeededRandom { seed },
        None => TieBreakPolicy::LowestIndex,
    };

    let committee = match (args.n.or(ballots.n), args.threshold.or(ballots.threshold)) {
        (Some(_), Some(_)) => bail!("give a committee size or a threshold, not both"),
        (None, None) => {
            bail!("no election mode: pass --n SIZE (fixed size) or --threshold S (adaptive size)")
        }
        (Some(n), None) if args.exact => elect_bruteforce(rule, &profile, n)?,
        (Some(n), None) => elect_topk(rule, &profile, n, tiebreak)?,
        (None, Some(_)) if args.exact => {
            bail!("--exact enumerates fixed-size committees; combine it with --n, not --threshold")
        }
        (None, Some(s)) => elect_threshold(rule, &profile, s, tiebreak)?,
    };

    println!("rule: {}", rule.name());
    let members: Vec<String> = committee
        .sorted_members()
        .iter()
        .map(|c| format!("a{c}"))
        .collect();
    println!("committee: {}", members.join(" "));
    println!("score: {}", fmt_float(committee.score()));
    Ok(())
}
