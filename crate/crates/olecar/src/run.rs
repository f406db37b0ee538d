//! Executing run configurations.

use std::path::Path;

use olecar_core::bandit::EstimatorOptions;
use olecar_core::cache::Policy;
use olecar_core::engine::{Engine, EngineConfig, LearningRate};
use olecar_core::harness::{
    aggregate, gen_environment, gen_phase_trace, run_replicate, sample_rounds, trace_expert_costs,
    BanditExperiment, BanditReplicate, EnvSpec, EtaChoice, PhaseSpec, Trace,
};
use olecar_core::metrics::{empirical_regret, MetricsSeries, RegretSeries, WeightSnapshot};
use rayon::prelude::*;

use crate::config::{
    BanditSimConfig, CacheSimConfig, EnvKind, PolicyChoice, RateChoice, RunConfig, SweepBase, SweepConfig, TraceInput,
};
use crate::report::{ConfigEcho, Report, SeriesBlock, SummaryRow};
use crate::trace_io::{parse_trace, TraceError};

/// Failure of a run.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Inconsistent parameters.
    #[error("{0}")]
    Invalid(String),
    /// Trace file problem.
    #[error(transparent)]
    Trace(#[from] TraceError),
    /// Rejected by the simulation library.
    #[error(transparent)]
    Core(#[from] olecar_core::Error),
}

impl RunError {
    /// Process exit code: 3 for trace I/O, 2 for bad parameters, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use olecar_core::Error as E;
        match self {
            RunError::Trace(_) => 3,
            RunError::Invalid(_) => 2,
            RunError::Core(
                E::InvalidParameter { .. } | E::InvalidSpec(_) | E::EmptyTrace | E::DimensionMismatch { .. },
            ) => 2,
            RunError::Core(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(RunError::Invalid(msg.into()))
}

/// Run any configuration and build its report.
pub fn run(config: &RunConfig) -> Result<Report> {
    let (summary, series) = match config {
        RunConfig::CacheSim(c) => {
            let (rows, blocks) = cache_sim(c)?;
            (rows, c.series.then_some(blocks))
        }
        RunConfig::BanditSim(c) => {
            let (rows, blocks) = bandit_sim(c)?;
            (rows, c.series.then_some(blocks))
        }
        RunConfig::Sweep(c) => (sweep(c)?, None),
    };
    Ok(Report {
        config: ConfigEcho::new(config.clone()),
        summary,
        series,
    })
}

/// Load or generate the request sequence.
pub fn load_trace(input: &TraceInput, seed: u64) -> Result<Trace> {
    match input {
        TraceInput::File { path, format } => Ok(parse_trace(Path::new(path), format)?),
        TraceInput::Synthetic { spec } => {
            let spec: PhaseSpec = spec.parse()?;
            Ok(gen_phase_trace(&spec, seed)?)
        }
    }
}

/// Engine configuration of a learning policy under `cfg`.
pub fn learner_config(policy: PolicyChoice, cfg: &CacheSimConfig, trace_len: usize) -> Result<EngineConfig> {
    let mut engine = match policy {
        PolicyChoice::Lecar => EngineConfig::lecar(cfg.cache_size),
        PolicyChoice::Olecar => EngineConfig {
            learning_rate: LearningRate::Auto {
                horizon: trace_len as u64,
            },
            ..EngineConfig::olecar(cfg.cache_size)
        },
        other => return invalid(format!("{} is not a learning policy", other.name())),
    };
    if let Some(rate) = cfg.learning_rate {
        engine.learning_rate = match rate {
            RateChoice::Fixed(eta) => LearningRate::Fixed(eta),
            RateChoice::Auto => LearningRate::Auto {
                horizon: trace_len as u64,
            },
            RateChoice::AutoStream => LearningRate::AutoStream,
        };
    }
    if let Some(h) = cfg.history_size {
        engine.history_size = h;
    }
    if let Some(mode) = cfg.cost_mode {
        engine.cost_mode = mode;
    }
    if let Some(on) = cfg.importance_weighting {
        engine.estimator = EstimatorOptions {
            importance_weighting: on,
            ..engine.estimator
        };
    }
    Ok(engine.with_seed(cfg.seed))
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn weights_at(snapshots: &[WeightSnapshot], round: u64) -> &[f64] {
    let idx = snapshots.partition_point(|s| s.round <= round);
    idx.checked_sub(1).map_or(&[], |i| &snapshots[i].weights)
}

fn run_series(label: &str, metrics: &MetricsSeries, regret: &RegretSeries) -> SeriesBlock {
    let round = sample_rounds(metrics.summary.rounds);
    SeriesBlock {
        label: label.into(),
        cum_cost: round.iter().map(|&r| metrics.rounds[r as usize - 1].cum_cost).collect(),
        regret: round.iter().map(|&r| regret.prefix[r as usize - 1]).collect(),
        weights: round
            .iter()
            .map(|&r| normalized(weights_at(&metrics.weights, r)))
            .collect(),
        round,
        regret_std_err: None,
        bound: None,
    }
}

/// Summary rows and series blocks of a cache simulation.
pub fn cache_sim(cfg: &CacheSimConfig) -> Result<(Vec<SummaryRow>, Vec<SeriesBlock>)> {
    if cfg.policies.is_empty() {
        return invalid("no policy selected");
    }
    if cfg.cache_size == 0 {
        return invalid("cache size must be at least 1");
    }
    let trace = load_trace(&cfg.trace, cfg.seed)?;
    let keys = trace.intern();
    let (experts, expert_runs) = trace_expert_costs(&keys, &Policy::EXPERTS, cfg.cache_size)?;
    let (best, _) = experts.best();
    let best_name = Policy::EXPERTS[best].name().to_string();

    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    for &policy in &cfg.policies {
        let (metrics, eta) = match policy {
            PolicyChoice::Lru => (expert_runs[0].clone(), None),
            PolicyChoice::Lfu => (expert_runs[1].clone(), None),
            learner => {
                let mut engine = Engine::new(learner_config(learner, cfg, keys.len())?)?;
                let metrics = engine.run_trace(&keys)?;
                (metrics, Some(engine.eta()))
            }
        };
        let regret = empirical_regret(&metrics, &experts);
        rows.push(SummaryRow {
            label: policy.name().into(),
            eta,
            hits: Some(metrics.summary.hits),
            misses: Some(metrics.summary.misses),
            hit_rate: Some(metrics.summary.hit_rate),
            c_a: regret.c_a,
            c_best: regret.c_best,
            best_expert: Some(best_name.clone()),
            regret: regret.regret,
            ..SummaryRow::default()
        });
        blocks.push(run_series(policy.name(), &metrics, &regret));
    }
    Ok((rows, blocks))
}

fn default_means(arms: usize) -> Vec<f64> {
    let mut means = vec![0.5; arms];
    if let Some(first) = means.first_mut() {
        *first = 0.1;
    }
    means
}

/// Experiment described by a `bandit-sim` configuration.
pub fn bandit_experiment(cfg: &BanditSimConfig) -> Result<BanditExperiment> {
    if cfg.arms == 0 {
        return invalid("need at least one arm");
    }
    if cfg.experts == 0 || cfg.experts > cfg.arms {
        return invalid(format!("experts must be between 1 and the number of arms ({})", cfg.arms));
    }
    if cfg.horizon == 0 {
        return invalid("horizon must be at least 1");
    }
    let means = cfg.means.clone().unwrap_or_else(|| default_means(cfg.arms));
    if means.len() != cfg.arms {
        return invalid(format!("{} means given for {} arms", means.len(), cfg.arms));
    }
    let env = match cfg.env {
        EnvKind::Stochastic => EnvSpec::stochastic(means, cfg.delay_max),
        EnvKind::Switching => {
            let at = cfg.switch_at.unwrap_or((cfg.horizon / 2 + 1).max(2));
            EnvSpec::swapped_at(means, at, cfg.delay_max)
        }
    };
    gen_environment(env.clone(), 0)?;
    let eta = match cfg.learning_rate {
        RateChoice::Fixed(eta) => EtaChoice::Fixed(eta),
        RateChoice::Auto => EtaChoice::Optimal,
        RateChoice::AutoStream => return invalid("auto-stream applies to cache simulations only"),
    };
    let exp = BanditExperiment {
        eta,
        ..BanditExperiment::new(env, cfg.experts, cfg.horizon)
    };
    exp.resolved_eta()?;
    Ok(exp)
}

/// Replicate seeds of a `bandit-sim` configuration.
pub fn replicate_seeds(cfg: &BanditSimConfig) -> Result<Vec<u64>> {
    if cfg.seeds == 0 {
        return invalid("need at least one seed");
    }
    let end = cfg
        .seed_base
        .checked_add(cfg.seeds)
        .ok_or_else(|| RunError::Invalid("seed range overflows".into()))?;
    Ok((cfg.seed_base..end).collect())
}

/// Run replicates in parallel, ordered by seed.
pub fn run_replicates(exp: &BanditExperiment, seeds: &[u64]) -> Result<Vec<BanditReplicate>> {
    let mut reps = seeds
        .par_iter()
        .map(|&s| run_replicate(exp, s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    reps.sort_by_key(|r| r.seed);
    Ok(reps)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Summary rows and the aggregate series of a bandit experiment.
pub fn bandit_sim(cfg: &BanditSimConfig) -> Result<(Vec<SummaryRow>, Vec<SeriesBlock>)> {
    let exp = bandit_experiment(cfg)?;
    let reps = run_replicates(&exp, &replicate_seeds(cfg)?)?;

    let rounds = sample_rounds(exp.horizon);
    let cum_cost: Vec<f64> = rounds
        .iter()
        .map(|&r| mean(reps.iter().map(|x| x.metrics.rounds[r as usize - 1].cum_cost)))
        .collect();
    let weights: Vec<Vec<f64>> = rounds
        .iter()
        .map(|&r| {
            let per_rep: Vec<Vec<f64>> = reps
                .iter()
                .map(|x| normalized(weights_at(&x.metrics.weights, r)))
                .collect();
            (0..exp.num_experts())
                .map(|i| mean(per_rep.iter().map(|w| w[i])))
                .collect()
        })
        .collect();

    let report = aggregate(&exp, reps)?;
    let mut rows = vec![SummaryRow {
        label: "mean".into(),
        eta: Some(report.eta),
        c_a: mean(report.replicates.iter().map(|r| r.c_a)),
        c_best: mean(report.replicates.iter().map(|r| r.c_best)),
        regret: report.mean_regret,
        regret_std_err: Some(report.std_err),
        bound: Some(report.bound),
        optimal_bound: Some(report.optimal_bound),
        raw_regret: Some(report.mean_raw_regret),
        ..SummaryRow::default()
    }];
    rows.extend(report.replicates.iter().map(|r| SummaryRow {
        label: "replicate".into(),
        seed: Some(r.seed),
        eta: Some(report.eta),
        c_a: r.c_a,
        c_best: r.c_best,
        best_expert: Some(r.best_expert.to_string()),
        regret: r.regret,
        raw_regret: Some(r.raw_c_a - r.raw_c_best),
        ..SummaryRow::default()
    }));
    let block = SeriesBlock {
        label: "mean".into(),
        round: rounds,
        cum_cost,
        regret: report.curve.iter().map(|p| p.mean).collect(),
        weights,
        regret_std_err: Some(report.curve.iter().map(|p| p.std_err).collect()),
        bound: Some(report.curve.iter().map(|p| p.bound).collect()),
    };
    Ok((rows, vec![block]))
}

/// One row per value (and learning policy), with the lowest regret marked.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SummaryRow>> {
    if cfg.values.is_empty() {
        return invalid("sweep needs at least one value");
    }
    let mut rows = Vec::new();
    for &value in &cfg.values {
        match &cfg.base {
            SweepBase::CacheSim(base) => {
                let policies: Vec<PolicyChoice> = base.policies.iter().copied().filter(|p| p.is_learner()).collect();
                if policies.is_empty() {
                    return invalid("learning-rate sweep needs lecar or olecar");
                }
                let c = CacheSimConfig {
                    policies,
                    learning_rate: Some(value),
                    series: false,
                    ..base.clone()
                };
                for mut row in cache_sim(&c)?.0 {
                    row.label = format!("{} learning-rate={value}", row.label);
                    rows.push(row);
                }
            }
            SweepBase::BanditSim(base) => {
                let c = BanditSimConfig {
                    learning_rate: value,
                    series: false,
                    ..base.clone()
                };
                let mut row = bandit_sim(&c)?.0.swap_remove(0);
                row.label = format!("learning-rate={value}");
                rows.push(row);
            }
        }
    }
    let best = rows
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.regret < rows[b].regret { i } else { b });
    for (i, row) in rows.iter_mut().enumerate() {
        row.argmin = Some(i == best);
    }
    Ok(rows)
}
