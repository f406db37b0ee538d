//! Per-round cost series and regret against the best expert.
//!
//! Regret is reported as `C_A - C_best`: positive when the algorithm pays more
//! than the best single expert in hindsight.

use alloc::vec::Vec;

/// One round of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoundRecord {
    /// 1-based round.
    pub round: u64,
    /// Cost incurred in this round.
    pub cost: f64,
    /// Cumulative cost through this round.
    pub cum_cost: f64,
    /// Cache hit flag, for cache runs.
    pub hit: Option<bool>,
}

/// Expert weights at a sampled round.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightSnapshot {
    /// Round after which the weights were taken.
    pub round: u64,
    /// Weights.
    pub weights: Vec<f64>,
}

/// Aggregate numbers for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunSummary {
    /// Rounds played.
    pub rounds: u64,
    /// Hits (cache runs only; zero otherwise).
    pub hits: u64,
    /// Misses (cache runs only; zero otherwise).
    pub misses: u64,
    /// Hits over rounds.
    pub hit_rate: f64,
    /// Cumulative cost `C_A`.
    pub total_cost: f64,
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsSeries {
    /// Per-round records.
    pub rounds: Vec<RoundRecord>,
    /// Weights sampled every [`snapshot_interval`](Self::snapshot_interval) rounds.
    pub weights: Vec<WeightSnapshot>,
    /// Sampling interval of the weight snapshots.
    pub snapshot_interval: u64,
    /// Summary.
    pub summary: RunSummary,
}

impl MetricsSeries {
    /// Cumulative cost after each round.
    pub fn cumulative_costs(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.cum_cost).collect()
    }

    /// Final cumulative cost.
    pub fn total_cost(&self) -> f64 {
        self.summary.total_cost
    }
}

/// Snapshot interval for a horizon: `max(1, T / 1000)`.
pub fn snapshot_interval(horizon: u64) -> u64 {
    (horizon / 1000).max(1)
}

/// Incremental builder for [`MetricsSeries`].
#[derive(Debug, Clone)]
pub struct MetricsRecorder {
    series: MetricsSeries,
}

impl MetricsRecorder {
    /// Recorder for an expected horizon (used only for the snapshot interval
    /// and preallocation).
    pub fn new(horizon: u64) -> Self {
        MetricsRecorder {
            series: MetricsSeries {
                rounds: Vec::with_capacity(horizon as usize),
                weights: Vec::new(),
                snapshot_interval: snapshot_interval(horizon),
                summary: RunSummary {
                    rounds: 0,
                    hits: 0,
                    misses: 0,
                    hit_rate: 0.0,
                    total_cost: 0.0,
                },
            },
        }
    }

    /// Record a round. `weights` is stored when the round is a sampling point
    /// (and for round 1).
    pub fn push(&mut self, cost: f64, hit: Option<bool>, weights: &[f64]) {
        let s = &mut self.series;
        let round = s.summary.rounds + 1;
        let cum_cost = s.summary.total_cost + cost;
        s.rounds.push(RoundRecord {
            round,
            cost,
            cum_cost,
            hit,
        });
        s.summary.rounds = round;
        s.summary.total_cost = cum_cost;
        match hit {
            Some(true) => s.summary.hits += 1,
            Some(false) => s.summary.misses += 1,
            None => {}
        }
        if round == 1 || round.is_multiple_of(s.snapshot_interval) {
            s.weights.push(WeightSnapshot {
                round,
                weights: weights.to_vec(),
            });
        }
    }

    /// Finish and compute the hit rate.
    pub fn finish(mut self) -> MetricsSeries {
        let s = &mut self.series.summary;
        s.hit_rate = if s.rounds == 0 {
            0.0
        } else {
            s.hits as f64 / s.rounds as f64
        };
        self.series
    }
}

/// Cumulative cost of every expert, per round.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertCosts {
    cumulative: Vec<Vec<f64>>,
}

impl ExpertCosts {
    /// From per-expert cumulative series of equal length.
    pub fn new(cumulative: Vec<Vec<f64>>) -> Self {
        debug_assert!(cumulative.windows(2).all(|w| w[0].len() == w[1].len()));
        ExpertCosts { cumulative }
    }

    /// From per-expert runs.
    pub fn from_runs<'a>(runs: impl IntoIterator<Item = &'a MetricsSeries>) -> Self {
        Self::new(runs.into_iter().map(MetricsSeries::cumulative_costs).collect())
    }

    /// Number of experts.
    pub fn num_experts(&self) -> usize {
        self.cumulative.len()
    }

    /// Number of rounds.
    pub fn rounds(&self) -> usize {
        self.cumulative.first().map_or(0, Vec::len)
    }

    /// Cumulative series of expert `i`.
    pub fn expert(&self, i: usize) -> &[f64] {
        &self.cumulative[i]
    }

    /// Final cost of every expert.
    pub fn totals(&self) -> Vec<f64> {
        self.cumulative
            .iter()
            .map(|c| c.last().copied().unwrap_or(0.0))
            .collect()
    }

    /// Best expert (lowest index among ties) and its final cost `C_best`.
    pub fn best(&self) -> (usize, f64) {
        self.totals()
            .into_iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, c)| if c < acc.1 { (i, c) } else { acc })
    }

    /// `C_best` over the first `t` rounds (`t >= 1`).
    pub fn prefix_best(&self, t: usize) -> f64 {
        self.cumulative
            .iter()
            .map(|c| c[t - 1])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Regret of a run against the best expert.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretSeries {
    /// `C_A(t) - C_best(t)` for every prefix `t`, with `C_best(t)` the best
    /// expert over that prefix.
    pub prefix: Vec<f64>,
    /// `C_A(T)`.
    pub c_a: f64,
    /// `C_best(T)`.
    pub c_best: f64,
    /// Index of the best expert over the whole run.
    pub best_expert: usize,
    /// `C_A(T) - C_best(T)`.
    pub regret: f64,
}

/// `C_A - C_best`.
pub fn regret(c_a: f64, c_best: f64) -> f64 {
    c_a - c_best
}

/// Regret series of `run` against `experts`. Both must cover the same rounds.
pub fn empirical_regret(run: &MetricsSeries, experts: &ExpertCosts) -> RegretSeries {
    assert_eq!(
        run.rounds.len(),
        experts.rounds(),
        "run and expert series cover different rounds"
    );
    let prefix = run
        .rounds
        .iter()
        .enumerate()
        .map(|(t, r)| regret(r.cum_cost, experts.prefix_best(t + 1)))
        .collect();
    let (best_expert, c_best) = experts.best();
    let c_a = run.total_cost();
    RegretSeries {
        prefix,
        c_a,
        c_best,
        best_expert,
        regret: regret(c_a, c_best),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn series(costs: &[f64]) -> MetricsSeries {
        let mut r = MetricsRecorder::new(costs.len() as u64);
        for &c in costs {
            r.push(c, Some(c == 0.0), &[1.0]);
        }
        r.finish()
    }

    #[test]
    fn regret_arithmetic() {
        assert_eq!(regret(100.0, 100.0), 0.0);
        assert_eq!(regret(150.0, 100.0), 50.0);
    }

    #[test]
    fn self_comparison_is_zero_everywhere() {
        let best = series(&[1.0, 0.0, 1.0, 1.0, 0.0]);
        let worse = series(&[1.0, 1.0, 1.0, 1.0, 1.0]);
        let experts = ExpertCosts::from_runs([&best, &worse]);
        let r = empirical_regret(&best, &experts);
        assert!(r.prefix.iter().all(|&x| x == 0.0));
        assert_eq!(r.regret, 0.0);
        assert_eq!(r.best_expert, 0);
        assert_eq!(r.c_best, 3.0);
    }

    #[test]
    fn prefix_best_switches() {
        let a = series(&[0.0, 0.0, 1.0, 1.0]);
        let b = series(&[1.0, 1.0, 0.0, 0.0]);
        let experts = ExpertCosts::from_runs([&a, &b]);
        assert_eq!(experts.prefix_best(2), 0.0);
        assert_eq!(experts.prefix_best(4), 2.0);
        let alg = series(&[0.0, 0.0, 0.0, 0.0]);
        let r = empirical_regret(&alg, &experts);
        assert_eq!(r.prefix, vec![0.0, 0.0, -1.0, -2.0]);
    }

    #[test]
    fn recorder_summary_and_snapshots() {
        let mut r = MetricsRecorder::new(3000);
        for i in 0..3000 {
            r.push((i % 2) as f64, Some(i % 2 == 0), &[i as f64]);
        }
        let s = r.finish();
        assert_eq!(s.snapshot_interval, 3);
        assert_eq!(s.weights.len(), 1001);
        assert_eq!(s.summary.hits, 1500);
        assert_eq!(s.summary.hit_rate, 0.5);
        assert_eq!(s.summary.total_cost, 1500.0);
        assert!(s.rounds.windows(2).all(|w| w[0].cum_cost <= w[1].cum_cost));
    }
}
