//! Best-expert oracles.
//!
//! For cache traces the counterfactual cost of unfollowed advice cannot be
//! observed, so each expert policy is replayed standalone on the same trace.
//! For synthetic environments the full cost table is known and each expert's
//! cost is read off it directly.

use alloc::vec;
use alloc::vec::Vec;

use crate::cache::{Access, CacheState, Policy};
use crate::error::{Error, Result};
use crate::harness::env::BanditEnvironment;
use crate::metrics::{ExpertCosts, MetricsRecorder, MetricsSeries};

/// Replay a pure LRU or LFU cache over `trace`.
pub fn simulate_policy<K: Ord + Clone>(policy: Policy, trace: &[K], cache_size: usize) -> Result<MetricsSeries> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut cache = CacheState::new(cache_size)?;
    let mut recorder = MetricsRecorder::new(trace.len() as u64);
    for (i, key) in trace.iter().enumerate() {
        let round = i as u64 + 1;
        let hit = cache.access(key, round) == Access::Hit;
        if !hit {
            let victim = if cache.is_full() {
                let slot = cache.advise(policy)?;
                cache.key_at(slot).cloned()
            } else {
                None
            };
            cache.insert_with_eviction(key.clone(), victim.as_ref(), round)?;
        }
        recorder.push(if hit { 0.0 } else { 1.0 }, Some(hit), &[]);
    }
    Ok(recorder.finish())
}

/// Standalone runs of every policy in `experts`, with their cost series.
pub fn trace_expert_costs<K: Ord + Clone>(
    trace: &[K],
    experts: &[Policy],
    cache_size: usize,
) -> Result<(ExpertCosts, Vec<MetricsSeries>)> {
    if experts.is_empty() {
        return Err(Error::InvalidSpec("no experts".into()));
    }
    let runs = experts
        .iter()
        .map(|&p| simulate_policy(p, trace, cache_size))
        .collect::<Result<Vec<_>>>()?;
    Ok((ExpertCosts::from_runs(&runs), runs))
}

/// Best expert and `C_best` for a cache trace.
pub fn best_expert_cost_trace<K: Ord + Clone>(
    trace: &[K],
    experts: &[Policy],
    cache_size: usize,
) -> Result<(usize, f64)> {
    Ok(trace_expert_costs(trace, experts, cache_size)?.0.best())
}

/// Per-round cumulative effective cost of fixed-arm experts.
pub fn env_expert_costs(env: &BanditEnvironment, expert_arms: &[usize], horizon: u64) -> Result<ExpertCosts> {
    if expert_arms.is_empty() {
        return Err(Error::InvalidSpec("no experts".into()));
    }
    if let Some(&a) = expert_arms.iter().find(|&&a| a >= env.num_arms()) {
        return Err(Error::InvalidSpec(alloc::format!("expert arm {a} out of range")));
    }
    let mut cumulative = vec![Vec::with_capacity(horizon as usize); expert_arms.len()];
    let mut totals = vec![0.0; expert_arms.len()];
    for round in 1..=horizon {
        for (i, &arm) in expert_arms.iter().enumerate() {
            totals[i] += env.effective_cost(round, arm);
            cumulative[i].push(totals[i]);
        }
    }
    Ok(ExpertCosts::new(cumulative))
}

/// Best expert and `C_best` for an environment.
pub fn best_expert_cost_env(env: &BanditEnvironment, expert_arms: &[usize], horizon: u64) -> Result<(usize, f64)> {
    Ok(env_expert_costs(env, expert_arms, horizon)?.best())
}
