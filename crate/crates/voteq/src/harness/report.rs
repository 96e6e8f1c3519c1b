//! The cross-agent comparison: an environments x agents score matrix with
//! the best agent per environment marked, plus per-environment rankings,
//! rendered as aligned text and as CSV.

use super::config::MetricSettings;
use super::logio::fmt_float;
use super::metric::AgentCurve;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Environments in first-appearance order (table rows).
    pub envs: Vec<String>,
    /// Agents in first-appearance order (table columns).
    pub agents: Vec<String>,
    /// `scores[row][col]` and `stderrs[row][col]` per (env, agent).
    pub scores: Vec<Vec<f64>>,
    pub stderrs: Vec<Vec<f64>>,
    /// Per row, agent column indices sorted by descending score, ties
    /// broken by agent name; `ranking[row][0]` is the best cell.
    pub ranking: Vec<Vec<usize>>,
    pub settings: MetricSettings,
}

/// Builds the comparison from one curve per (env, agent) pair.
pub fn compare_report(curves: &[AgentCurve]) -> Result<ComparisonReport, HarnessError> {
    let mut envs: Vec<String> = Vec::new();
    let mut agents: Vec<String> = Vec::new();
    for curve in curves {
        if !envs.contains(&curve.env) {
            envs.push(curve.env.clone());
        }
        if !agents.contains(&curve.agent) {
            agents.push(curve.agent.clone());
        }
    }
    if agents.len() < 2 {
        return Err(HarnessError::NotComparable(agents.len()));
    }
    let mut scores = vec![vec![f64::NAN; agents.len()]; envs.len()];
    let mut stderrs = vec![vec![0.0; agents.len()]; envs.len()];
    for curve in curves {
        let row = envs.iter().position(|e| *e == curve.env).unwrap();
        let col = agents.iter().position(|a| *a == curve.agent).unwrap();
        scores[row][col] = curve.score;
        stderrs[row][col] = curve.stderr_at_peak;
    }
    for (row, env) in envs.iter().enumerate() {
        if let Some(col) = scores[row].iter().position(|s| s.is_nan()) {
            return Err(HarnessError::BadLog(format!(
                "missing curve for agent `{}` on `{env}`",
                agents[col]
            )));
        }
    }
    let ranking = scores
        .iter()
        .map(|row| {
            let mut order: Vec<usize> = (0..agents.len()).collect();
            order.sort_by(|&a, &b| {
                row[b]
                    .partial_cmp(&row[a])
                    .unwrap()
                    .then_with(|| agents[a].cmp(&agents[b]))
            });
            order
        })
        .collect();
    Ok(ComparisonReport {
        envs,
        agents,
        scores,
        stderrs,
        ranking,
        settings: curves[0].settings,
    })
}

impl ComparisonReport {
    /// Column index of the best agent on an environment row.
    pub fn best(&self, row: usize) -> usize {
        self.ranking[row][0]
    }

    /// Score of a named (env, agent) cell, if present.
    pub fn score_of(&self, env: &str, agent: &str) -> Option<f64> {
        let row = self.envs.iter().position(|e| e == env)?;
        let col = self.agents.iter().position(|a| a == agent)?;
        Some(self.scores[row][col])
    }

    /// Aligned text: the score matrix with the per-row best starred, then
    /// per-environment rankings.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "score = max of mean EMA curve (coeff {}, interval {}, {} samples)\n\n",
            fmt_float(self.settings.ema_coeff),
            self.settings.sample_interval,
            self.settings.sample_count,
        );
        let mut cells: Vec<Vec<String>> = Vec::new();
        for (row, _) in self.envs.iter().enumerate() {
            let best = self.best(row);
            cells.push(
                self.scores[row]
                    .iter()
                    .enumerate()
                    .map(|(col, s)| {
                        let star = if col == best { "*" } else { "" };
                        format!("{}{star}", fmt_float(*s))
                    })
                    .collect(),
            );
        }
        let env_width = self
            .envs
            .iter()
            .map(|e| e.len())
            .max()
            .unwrap_or(0)
            .max("environment".len());
        let col_widths: Vec<usize> = self
            .agents
            .iter()
            .enumerate()
            .map(|(col, name)| {
                cells
                    .iter()
                    .map(|row| row[col].len())
                    .max()
                    .unwrap_or(0)
                    .max(name.len())
            })
            .collect();
        out.push_str(&format!("{:<env_width$}", "environment"));
        for (col, name) in self.agents.iter().enumerate() {
            out.push_str(&format!("  {:>width$}", name, width = col_widths[col]));
        }
        out.push('\n');
        for (row, env) in self.envs.iter().enumerate() {
            out.push_str(&format!("{env:<env_width$}"));
            for (col, cell) in cells[row].iter().enumerate() {
                out.push_str(&format!("  {:>width$}", cell, width = col_widths[col]));
            }
            out.push('\n');
        }
        out.push('\n');
        for (row, env) in self.envs.iter().enumerate() {
            let ranked: Vec<String> = self.ranking[row]
                .iter()
                .map(|&col| format!("{} ({})", self.agents[col], fmt_float(self.scores[row][col])))
                .collect();
            out.push_str(&format!("{env}: {}\n", ranked.join(" > ")));
        }
        out
    }

    /// Long-form CSV: one row per (env, agent), ranked within each
    /// environment, the best row flagged.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("env,rank,agent,score,stderr,best\n");
        for (row, env) in self.envs.iter().enumerate() {
            for (rank, &col) in self.ranking[row].iter().enumerate() {
                out.push_str(&format!(
                    "{env},{},{},{},{},{}\n",
                    rank + 1,
                    self.agents[col],
                    fmt_float(self.scores[row][col]),
                    fmt_float(self.stderrs[row][col]),
                    u8::from(rank == 0),
                ));
            }
        }
        out
    }
}
