//! The learning-curve metric: per run, an exponential moving average of
//! episode returns is sampled at equidistant global-step points; curves are
//! meaned across seeds pointwise, and an agent's score is the maximum of
//! that mean curve.

use super::config::MetricSettings;
use super::logio::RunLog;
use super::HarnessError;

/// One agent's aggregated learning curve on one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentCurve {
    pub agent: String,
    pub env: String,
    /// Maximum of the mean curve (first peak on ties).
    pub score: f64,
    /// Sample step where the score is attained.
    pub score_step: u64,
    /// Standard error across seeds at the peak (0 for a single seed).
    pub stderr_at_peak: f64,
    pub seeds: usize,
    /// Mean sampled EMA, one value per sample point.
    pub mean_curve: Vec<f64>,
    pub settings: MetricSettings,
}

/// The sample grid: `interval * j` for `j = 1 ..= count`.
pub fn sample_points(settings: &MetricSettings) -> Vec<u64> {
    (1..=settings.sample_count as u64)
        .map(|j| settings.sample_interval * j)
        .collect()
}

/// Samples one run's EMA at the grid points.
///
/// The EMA is indexed by episode — initialized at the run's first episode
/// return, then `ema = coeff * ema + (1 - coeff) * r` per episode — and
/// sampled by global step: a sample point reads the EMA after the last
/// episode ending at or before it. Points before the first episode end
/// read the initial value, keeping every sample a convex combination of
/// observed returns.
pub fn ema_curve(log: &RunLog, settings: &MetricSettings) -> Result<Vec<f64>, HarnessError> {
    let horizon = settings.horizon();
    if horizon > log.total_steps {
        return Err(HarnessError::HorizonTooLong {
            horizon,
            total_steps: log.total_steps,
        });
    }
    if log.entries.is_empty() {
        return Err(HarnessError::NoEpisodes {
            agent: log.agent.clone(),
            env: log.env.clone(),
            seed: log.seed,
        });
    }
    log.validate()?;
    let mut ema = log.entries[0].1;
    let mut next = 0usize;
    let mut curve = Vec::with_capacity(settings.sample_count);
    for point in sample_points(settings) {
        while next < log.entries.len() && log.entries[next].0 <= point {
            let r = log.entries[next].1;
            if next == 0 {
                ema = r;
            } else {
                ema = settings.ema_coeff * ema + (1.0 - settings.ema_coeff) * r;
            }
            next += 1;
        }
        curve.push(ema);
    }
    Ok(curve)
}

/// Aggregates one agent's runs on one environment into its curve and score.
pub fn ema_metric(logs: &[&RunLog], settings: &MetricSettings) -> Result<AgentCurve, HarnessError> {
    let Some(first) = logs.first() else {
        return Err(HarnessError::NoMetricLogs);
    };
    if logs
        .iter()
        .any(|l| l.agent != first.agent || l.env != first.env)
    {
        return Err(HarnessError::MixedMetricGroup);
    }
    let per_seed: Vec<Vec<f64>> = logs
        .iter()
        .map(|log| ema_curve(log, settings))
        .collect::<Result<_, _>>()?;
    let n = logs.len() as f64;
    let mean_curve: Vec<f64> = (0..settings.sample_count)
        .map(|j| per_seed.iter().map(|c| c[j]).sum::<f64>() / n)
        .collect();
    let mut best = 0usize;
    for (j, value) in mean_curve.iter().enumerate() {
        if *value > mean_curve[best] {
            best = j;
        }
    }
    let score = mean_curve[best];
    let stderr_at_peak = if logs.len() < 2 {
        0.0
    } else {
        let variance = per_seed
            .iter()
            .map(|c| (c[best] - score).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (variance / n).sqrt()
    };
    Ok(AgentCurve {
        agent: first.agent.clone(),
        env: first.env.clone(),
        score,
        score_step: settings.sample_interval * (best as u64 + 1),
        stderr_at_peak,
        seeds: logs.len(),
        mean_curve,
        settings: *settings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(agent: &str, seed: u64, entries: Vec<(u64, f64)>) -> RunLog {
        RunLog {
            agent: agent.into(),
            env: "test-env".into(),
            seed,
            config_hash: 0,
            total_steps: 1000,
            entries,
        }
    }

    fn settings(coeff: f64, interval: u64, count: usize) -> MetricSettings {
        MetricSettings {
            ema_coeff: coeff,
            sample_interval: interval,
            sample_count: count,
        }
    }

    #[test]
    fn constant_returns_score_the_constant() {
        // EMA fixed point: smoothing a constant signal yields the constant.
        let entries: Vec<(u64, f64)> = (1..=100).map(|i| (i * 10, 0.5)).collect();
        let l = log("a", 0, entries);
        let curve = ema_metric(&[&l], &settings(0.9, 100, 10)).unwrap();
        assert!(curve.mean_curve.iter().all(|&v| v == 0.5));
        assert_eq!(curve.score, 0.5);
        assert_eq!(curve.stderr_at_peak, 0.0);
    }

    #[test]
    fn all_zero_returns_score_zero() {
        let entries: Vec<(u64, f64)> = (1..=50).map(|i| (i * 20, 0.0)).collect();
        let l = log("a", 0, entries);
        assert_eq!(ema_metric(&[&l], &settings(0.999, 100, 10)).unwrap().score, 0.0);
    }

    #[test]
    fn two_seeds_mean_pointwise() {
        let zeros = log("a", 0, (1..=100).map(|i| (i * 10, 0.0)).collect());
        let ones = log("a", 1, (1..=100).map(|i| (i * 10, 1.0)).collect());
        let curve = ema_metric(&[&zeros, &ones], &settings(0.99, 100, 10)).unwrap();
        assert!(curve.mean_curve.iter().all(|&v| v == 0.5));
        assert_eq!(curve.score, 0.5);
        assert_eq!(curve.seeds, 2);
        // Constant per-seed curves at 0 and 1: sd = sqrt(1/2), stderr = 1/2.
        assert!((curve.stderr_at_peak - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ema_traces_the_recursion_by_hand() {
        // Episodes end at steps 50 (r=1), 150 (r=0), 250 (r=0); coeff 0.5.
        // Samples at 100/200/300: after first episode EMA=1; after second
        // EMA=0.5; after third EMA=0.25.
        let l = log("a", 0, vec![(50, 1.0), (150, 0.0), (250, 0.0)]);
        let curve = ema_curve(&l, &settings(0.5, 100, 3)).unwrap();
        assert_eq!(curve, vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn samples_before_the_first_episode_read_its_return() {
        let l = log("a", 0, vec![(450, 0.75), (460, 0.25)]);
        let curve = ema_curve(&l, &settings(0.5, 100, 5)).unwrap();
        assert_eq!(curve[..4], [0.75, 0.75, 0.75, 0.75]);
        assert_eq!(curve[4], 0.5);
    }

    #[test]
    fn sample_point_on_an_episode_end_includes_it() {
        let l = log("a", 0, vec![(100, 1.0), (200, 0.0)]);
        let curve = ema_curve(&l, &settings(0.5, 100, 2)).unwrap();
        assert_eq!(curve, vec![1.0, 0.5]);
    }

    #[test]
    fn score_stays_within_observed_returns() {
        let l = log(
            "a",
            0,
            vec![(30, 0.9), (90, 0.2), (210, 0.4), (700, 0.35), (900, 0.8)],
        );
        let curve = ema_metric(&[&l], &settings(0.7, 100, 10)).unwrap();
        assert!(curve.score <= 0.9 && curve.score >= 0.2);
        for v in &curve.mean_curve {
            assert!((0.2..=0.9).contains(v));
        }
    }

    #[test]
    fn scaling_returns_by_a_power_of_two_scales_the_score_exactly() {
        // Power-of-two scaling shifts exponents only, so the linearity of
        // the EMA recursion holds bit-for-bit.
        let base = log(
            "a",
            0,
            vec![(30, 0.9), (90, 0.2), (210, 0.4), (700, 0.35), (900, 0.8)],
        );
        let mut scaled = base.clone();
        for (_, r) in &mut scaled.entries {
            *r *= 4.0;
        }
        let s = settings(0.9, 100, 10);
        let a = ema_metric(&[&base], &s).unwrap();
        let b = ema_metric(&[&scaled], &s).unwrap();
        assert_eq!(b.score, 4.0 * a.score);
        assert_eq!(b.score_step, a.score_step);
        for (x, y) in a.mean_curve.iter().zip(&b.mean_curve) {
            assert_eq!(*y, 4.0 * *x);
        }
    }

    #[test]
    fn first_peak_wins_ties() {
        let l = log("a", 0, vec![(50, 0.5), (950, 0.5)]);
        let curve = ema_metric(&[&l], &settings(0.5, 100, 10)).unwrap();
        assert_eq!(curve.score_step, 100);
    }

    #[test]
    fn horizon_beyond_the_log_is_a_diagnostic_error() {
        let mut l = log("a", 0, vec![(50, 0.5)]);
        l.total_steps = 500;
        let err = ema_curve(&l, &settings(0.5, 100, 10)).unwrap_err();
        assert!(matches!(
            err,
            HarnessError::HorizonTooLong { horizon: 1000, total_steps: 500 }
        ));
    }

    #[test]
    fn empty_log_is_a_diagnostic_error() {
        let l = log("a", 7, vec![]);
        let err = ema_metric(&[&l], &settings(0.5, 100, 10)).unwrap_err();
        assert!(err.to_string().contains("seed 7"), "{err}");
    }

    #[test]
    fn mixed_groups_are_rejected() {
        let a = log("a", 0, vec![(50, 0.5)]);
        let b = log("b", 0, vec![(50, 0.5)]);
        assert!(matches!(
            ema_metric(&[&a, &b], &settings(0.5, 100, 10)),
            Err(HarnessError::MixedMetricGroup)
        ));
        assert!(matches!(
            ema_metric(&[], &settings(0.5, 100, 10)),
            Err(HarnessError::NoMetricLogs)
        ));
    }

    #[test]
    fn sample_grid_is_equidistant_from_the_interval() {
        assert_eq!(sample_points(&settings(0.5, 2000, 4)), vec![2000, 4000, 6000, 8000]);
    }
}
