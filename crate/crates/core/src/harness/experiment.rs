//! Replicated EXP4-DFDC runs on synthetic environments.
//!
//! Each replicate plays `horizon` rounds against a seeded environment with
//! fixed-arm experts. Feedback for round `t'` arrives at `t' + d` and is applied
//! at the start of that round; feedback arriving after the horizon is never
//! seen. Costs are accounted after decay (`x / d`, or 0 past the threshold),
//! both for the learner and for the experts; undecayed totals are kept on the
//! side.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::bandit::{
    estimate_cost, optimal_learning_rate, regret_bound, optimal_regret_bound, AdviceMatrix,
    BoundFamily, DelayedFeedback, EstimatorOptions, WeightState,
};
use crate::error::{Error, Result};
use crate::harness::env::{gen_environment, EnvSpec};
use crate::harness::oracle::env_expert_costs;
use crate::metrics::{empirical_regret, snapshot_interval, MetricsRecorder, MetricsSeries, RegretSeries};
use crate::rng::DetRng;

/// Learning-rate choice for a bandit experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EtaChoice {
    /// Constant rate.
    Fixed(f64),
    /// `min(1, sqrt(K ln N / 2T))` for the experiment horizon.
    Optimal,
}

/// A bandit experiment, independent of seeds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BanditExperiment {
    /// Environment.
    pub env: EnvSpec,
    /// Arm recommended by each expert.
    pub expert_arms: Vec<usize>,
    /// Rounds per replicate.
    pub horizon: u64,
    /// Learning rate.
    pub eta: EtaChoice,
    /// Estimator flags.
    pub estimator: EstimatorOptions,
}

impl BanditExperiment {
    /// `N` experts on arms `0..N`, importance-weighted estimates, optimal rate.
    pub fn new(env: EnvSpec, num_experts: usize, horizon: u64) -> Self {
        BanditExperiment {
            env,
            expert_arms: (0..num_experts).collect(),
            horizon,
            eta: EtaChoice::Optimal,
            estimator: EstimatorOptions::IMPORTANCE_WEIGHTED,
        }
    }

    /// Number of arms `K`.
    pub fn num_actions(&self) -> usize {
        self.env.num_arms()
    }

    /// Number of experts `N`.
    pub fn num_experts(&self) -> usize {
        self.expert_arms.len()
    }

    /// Resolved learning rate.
    pub fn resolved_eta(&self) -> Result<f64> {
        match self.eta {
            EtaChoice::Fixed(eta) => Ok(eta),
            EtaChoice::Optimal => optimal_learning_rate(self.num_actions(), self.num_experts(), self.horizon),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidSpec("horizon must be at least 1".into()));
        }
        if self.expert_arms.is_empty() {
            return Err(Error::InvalidSpec("no experts".into()));
        }
        if self.expert_arms.iter().any(|&a| a >= self.num_actions()) {
            return Err(Error::InvalidSpec("expert arm out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    arrival: u64,
    origin: u64,
    feedback: DelayedFeedback,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.arrival, self.origin).cmp(&(other.arrival, other.origin))
    }
}

/// One seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditReplicate {
    /// Seed of the environment and the learner.
    pub seed: u64,
    /// Learning rate used.
    pub eta: f64,
    /// Effective (decayed) cost series of the learner.
    pub metrics: MetricsSeries,
    /// Regret against the best expert on effective costs.
    pub regret: RegretSeries,
    /// Undecayed cost of the learner.
    pub raw_cost: f64,
    /// Undecayed cost of the best expert by undecayed cost.
    pub raw_best: f64,
    /// Feedback events applied.
    pub feedback_events: u64,
}

/// Run one replicate with `seed`.
pub fn run_replicate(experiment: &BanditExperiment, seed: u64) -> Result<BanditReplicate> {
    experiment.validate()?;
    let env = gen_environment(experiment.env.clone(), seed)?;
    let k = env.num_arms();
    let n = experiment.num_experts();
    let eta = experiment.resolved_eta()?;
    let advice = AdviceMatrix::one_hot(k, &experiment.expert_arms)?;
    let mut state = WeightState::new(n, k, eta)?;
    let mut rng = DetRng::with_stream(seed, 1);
    let mut pending: BinaryHeap<Reverse<Pending>> = BinaryHeap::new();
    let mut recorder = MetricsRecorder::new(experiment.horizon);
    let mut raw_cost = 0.0;
    let mut raw_expert = vec![0.0; n];
    let mut feedback_events = 0;

    for round in 1..=experiment.horizon {
        while let Some(Reverse(p)) = pending.peek().copied() {
            if p.arrival > round {
                break;
            }
            pending.pop();
            let estimate = estimate_cost(&p.feedback, k, experiment.estimator)?;
            state.update_weights(&estimate, &advice)?;
            state.renormalize_if_needed();
            feedback_events += 1;
        }

        let dist = state.action_distribution(&advice)?;
        let action = dist.sample(&mut rng);
        let delay = env.delay(round);
        let raw = env.raw_cost(round, action);
        if delay <= env.threshold() {
            pending.push(Reverse(Pending {
                arrival: round + delay,
                origin: round,
                feedback: DelayedFeedback {
                    action,
                    raw_cost: raw,
                    delay,
                    threshold: env.threshold(),
                    acting_prob: dist.prob(action),
                },
            }));
        }
        raw_cost += raw;
        for (total, &arm) in raw_expert.iter_mut().zip(&experiment.expert_arms) {
            *total += env.raw_cost(round, arm);
        }
        recorder.push(env.effective_cost(round, action), None, state.weights());
    }

    let metrics = recorder.finish();
    let experts = env_expert_costs(&env, &experiment.expert_arms, experiment.horizon)?;
    let regret = empirical_regret(&metrics, &experts);
    Ok(BanditReplicate {
        seed,
        eta,
        metrics,
        regret,
        raw_cost,
        raw_best: raw_expert.into_iter().fold(f64::INFINITY, f64::min),
        feedback_events,
    })
}

/// Mean regret and bound at one sampled round.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegretPoint {
    /// Round.
    pub round: u64,
    /// Mean regret across replicates.
    pub mean: f64,
    /// Sample standard deviation.
    pub std_dev: f64,
    /// Standard error of the mean.
    pub std_err: f64,
    /// `2 eta t + K ln N / eta` at this round.
    pub bound: f64,
}

/// Final numbers of one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicateSummary {
    /// Seed.
    pub seed: u64,
    /// Effective cost of the learner.
    pub c_a: f64,
    /// Effective cost of the best expert.
    pub c_best: f64,
    /// `c_a - c_best`.
    pub regret: f64,
    /// Best expert index.
    pub best_expert: usize,
    /// Undecayed learner cost.
    pub raw_c_a: f64,
    /// Undecayed best-expert cost.
    pub raw_c_best: f64,
}

/// Aggregate over replicates, ordered by seed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentReport {
    /// Rounds per replicate.
    pub horizon: u64,
    /// Number of actions `K`.
    pub num_actions: usize,
    /// Number of experts `N`.
    pub num_experts: usize,
    /// Learning rate used.
    pub eta: f64,
    /// `2 eta T + K ln N / eta`.
    pub bound: f64,
    /// `2 sqrt(2 K T ln N)`.
    pub optimal_bound: f64,
    /// Mean final regret.
    pub mean_regret: f64,
    /// Standard deviation of the final regret.
    pub std_dev: f64,
    /// Standard error of the mean final regret.
    pub std_err: f64,
    /// Mean undecayed regret (diagnostic).
    pub mean_raw_regret: f64,
    /// Sampled regret curve.
    pub curve: Vec<RegretPoint>,
    /// Per-seed results.
    pub replicates: Vec<ReplicateSummary>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var))
}

/// Sampled rounds: every `max(1, T/1000)` rounds, plus `T`.
pub fn sample_rounds(horizon: u64) -> Vec<u64> {
    let step = snapshot_interval(horizon);
    let mut rounds: Vec<u64> = (1..=horizon / step).map(|i| i * step).collect();
    if rounds.last() != Some(&horizon) {
        rounds.push(horizon);
    }
    rounds
}

/// Combine replicates into a report. Order of `replicates` does not matter.
pub fn aggregate(experiment: &BanditExperiment, mut replicates: Vec<BanditReplicate>) -> Result<ExperimentReport> {
    if replicates.is_empty() {
        return Err(Error::InvalidSpec("no replicates".into()));
    }
    replicates.sort_by_key(|r| r.seed);
    let k = experiment.num_actions();
    let n = experiment.num_experts();
    let eta = experiment.resolved_eta()?;
    let count = replicates.len() as f64;

    let curve = sample_rounds(experiment.horizon)
        .into_iter()
        .map(|round| {
            let values: Vec<f64> = replicates
                .iter()
                .map(|r| r.regret.prefix[round as usize - 1])
                .collect();
            let (mean, std_dev) = mean_sd(&values);
            RegretPoint {
                round,
                mean,
                std_dev,
                std_err: std_dev / libm::sqrt(count),
                bound: regret_bound(eta, k, n, round, BoundFamily::Exp4Dfdc),
            }
        })
        .collect();

    let finals: Vec<f64> = replicates.iter().map(|r| r.regret.regret).collect();
    let (mean_regret, std_dev) = mean_sd(&finals);
    let raw: Vec<f64> = replicates.iter().map(|r| r.raw_cost - r.raw_best).collect();
    let summaries = replicates
        .iter()
        .map(|r| ReplicateSummary {
            seed: r.seed,
            c_a: r.regret.c_a,
            c_best: r.regret.c_best,
            regret: r.regret.regret,
            best_expert: r.regret.best_expert,
            raw_c_a: r.raw_cost,
            raw_c_best: r.raw_best,
        })
        .collect();

    Ok(ExperimentReport {
        horizon: experiment.horizon,
        num_actions: k,
        num_experts: n,
        eta,
        bound: regret_bound(eta, k, n, experiment.horizon, BoundFamily::Exp4Dfdc),
        optimal_bound: optimal_regret_bound(k, n, experiment.horizon),
        mean_regret,
        std_dev,
        std_err: std_dev / libm::sqrt(count),
        mean_raw_regret: mean_sd(&raw).0,
        curve,
        replicates: summaries,
    })
}

/// Run every seed sequentially and aggregate.
pub fn run_experiment(experiment: &BanditExperiment, seeds: &[u64]) -> Result<ExperimentReport> {
    let replicates = seeds
        .iter()
        .map(|&s| run_replicate(experiment, s))
        .collect::<Result<Vec<_>>>()?;
    aggregate(experiment, replicates)
}
