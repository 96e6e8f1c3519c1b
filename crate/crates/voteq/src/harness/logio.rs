//! Run logs and their CSV form: one row per completed episode, columns
//! `step,episode_return,seed,agent,env`.

use std::io::{Read, Write};

use super::HarnessError;

/// One training run's episode log: (global step, episode return) pairs in
/// strictly increasing step order, tagged with the run coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub agent: String,
    pub env: String,
    pub seed: u64,
    pub config_hash: u64,
    /// Steps the run trained for; the metric samples within this horizon.
    pub total_steps: u64,
    pub entries: Vec<(u64, f64)>,
}

impl RunLog {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut prev = 0u64;
        for (i, (step, ret)) in self.entries.iter().enumerate() {
            if i > 0 && *step <= prev {
                return Err(HarnessError::BadLog(format!(
                    "agent `{}` env `{}` seed {}: step {step} at row {i} does not increase past {prev}",
                    self.agent, self.env, self.seed
                )));
            }
            if !ret.is_finite() {
                return Err(HarnessError::BadLog(format!(
                    "agent `{}` env `{}` seed {}: non-finite return at step {step}",
                    self.agent, self.env, self.seed
                )));
            }
            prev = *step;
        }
        Ok(())
    }
}

/// The single float formatting path shared by every CSV, report, and
/// printed number: shortest decimal that round-trips the value exactly.
pub fn fmt_float(value: f64) -> String {
    format!("{value}")
}

/// Writes runs as one CSV stream, runs in order, episodes in step order.
pub fn write_runlogs_csv<W: Write>(out: W, logs: &[RunLog]) -> Result<(), HarnessError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    writer
        .write_record(["step", "episode_return", "seed", "agent", "env"])
        .map_err(|e| HarnessError::Csv(e.to_string()))?;
    for log in logs {
        for (step, ret) in &log.entries {
            writer
                .write_record([
                    step.to_string(),
                    fmt_float(*ret),
                    log.seed.to_string(),
                    log.agent.clone(),
                    log.env.clone(),
                ])
                .map_err(|e| HarnessError::Csv(e.to_string()))?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads a run-log CSV back into per-run logs, grouped by (agent, env,
/// seed) in first-appearance order. The config hash and step horizon are
/// not part of the CSV; the caller supplies them (typically from the
/// config stored beside the logs).
pub fn read_runlogs_csv<R: Read>(
    input: R,
    config_hash: u64,
    total_steps: u64,
) -> Result<Vec<RunLog>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| HarnessError::Csv(e.to_string()))?
        .clone();
    let expected = ["step", "episode_return", "seed", "agent", "env"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(HarnessError::Csv(format!(
            "unexpected header {:?} (expected {:?})",
            headers.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    let mut logs: Vec<RunLog> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| HarnessError::Csv(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_err = |what: &str, value: &str| {
            HarnessError::Csv(format!("row {}: bad {what} `{value}`", row + 2))
        };
        let step: u64 = field(0).parse().map_err(|_| parse_err("step", field(0)))?;
        let ret: f64 = field(1)
            .parse()
            .map_err(|_| parse_err("episode_return", field(1)))?;
        let seed: u64 = field(2).parse().map_err(|_| parse_err("seed", field(2)))?;
        let (agent, env) = (field(3).to_string(), field(4).to_string());
        let current = match logs.last_mut() {
            Some(last) if last.agent == agent && last.env == env && last.seed == seed => last,
            _ => {
                if logs
                    .iter()
                    .any(|l| l.agent == agent && l.env == env && l.seed == seed)
                {
                    return Err(HarnessError::Csv(format!(
                        "row {}: run (agent `{agent}`, env `{env}`, seed {seed}) appears in two separate blocks",
                        row + 2
                    )));
                }
                logs.push(RunLog {
                    agent,
                    env,
                    seed,
                    config_hash,
                    total_steps,
                    entries: Vec::new(),
                });
                logs.last_mut().unwrap()
            }
        };
        current.entries.push((step, ret));
    }
    for log in &logs {
        log.validate()?;
    }
    Ok(logs)
}
