//! OLeCaR / LeCaR cache replacement.
//!
//! Two experts, LRU and LFU, each advise a victim slot on every miss with a
//! full cache. The victim is sampled from the mixed action distribution over
//! slots. Every eviction is remembered in a bounded history; when an evicted
//! key is requested again while still in the history, the experts that had
//! recommended evicting it are charged a cost that decays with its history
//! position.

use alloc::vec::Vec;

use crate::bandit::{
    adjust_decayed_cost, estimate_cost, optimal_learning_rate, AdviceMatrix, DelayedFeedback,
    EstimatorOptions, WeightState,
};
use crate::cache::{Access, CacheState, EvictionHistory, EvictionRecord, Policy};
use crate::error::{invalid, Error, Result};
use crate::metrics::{MetricsRecorder, MetricsSeries};
use crate::rng::DetRng;

/// Number of experts.
pub const NUM_EXPERTS: usize = 2;

/// Expert order used in weight vectors.
pub const EXPERT_ORDER: [Policy; NUM_EXPERTS] = Policy::EXPERTS;

/// Learning rate of the original LeCaR.
pub const LECAR_LEARNING_RATE: f64 = 0.45;

/// Base of the LeCaR discount: the per-step discount is `0.005^(1/K)`.
pub const LEGACY_DISCOUNT_BASE: f64 = 0.005;

/// Raw cost of a miss before decay.
pub const MISS_COST: f64 = 1.0;

/// How the learning rate is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LearningRate {
    /// Constant rate in `(0, 1]`.
    Fixed(f64),
    /// Optimal rate for a known horizon.
    Auto {
        /// Horizon `T` (number of requests).
        horizon: u64,
    },
    /// Horizon unknown: at request `2^k` the rate becomes the optimal rate for
    /// `T = 2^k`. Weights are kept across the switch.
    AutoStream,
}

/// Cost charged for a history hit at position `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CostMode {
    /// `x / d`.
    Dfdc,
    /// `(0.005^(1/K))^d`, the original LeCaR discount.
    Legacy,
}

/// Engine parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EngineConfig {
    /// Cache capacity; also the number of actions `K`.
    pub cache_size: usize,
    /// Eviction history capacity `h`; also the delay threshold.
    pub history_size: usize,
    /// Learning rate schedule.
    pub learning_rate: LearningRate,
    /// Cost decay.
    pub cost_mode: CostMode,
    /// Estimator flags.
    pub estimator: EstimatorOptions,
    /// Seed for victim sampling.
    pub seed: u64,
}

impl EngineConfig {
    /// OLeCaR defaults: `h = K`, streaming optimal rate, `x / d` cost, no
    /// importance weighting, no cap.
    pub fn olecar(cache_size: usize) -> Self {
        EngineConfig {
            cache_size,
            history_size: cache_size,
            learning_rate: LearningRate::AutoStream,
            cost_mode: CostMode::Dfdc,
            estimator: EstimatorOptions::PLAIN,
            seed: 0,
        }
    }

    /// Original LeCaR: fixed rate 0.45 and the geometric discount.
    pub fn lecar(cache_size: usize) -> Self {
        EngineConfig {
            learning_rate: LearningRate::Fixed(LECAR_LEARNING_RATE),
            cost_mode: CostMode::Legacy,
            ..Self::olecar(cache_size)
        }
    }

    /// Same config with another seed.
    pub fn with_seed(self, seed: u64) -> Self {
        EngineConfig { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.cache_size == 0 {
            return Err(invalid("cache_size", "must be at least 1"));
        }
        if self.history_size == 0 {
            return Err(invalid("history_size", "must be at least 1"));
        }
        match self.learning_rate {
            LearningRate::Fixed(eta) if !(eta > 0.0 && eta <= 1.0) => {
                Err(invalid("learning_rate", "fixed rate must be in (0, 1]"))
            }
            LearningRate::Auto { horizon: 0 } => Err(invalid("horizon", "must be at least 1")),
            _ => Ok(()),
        }
    }

    /// Learning rate in effect for the first request.
    pub fn initial_eta(&self) -> Result<f64> {
        match self.learning_rate {
            LearningRate::Fixed(eta) => Ok(eta),
            LearningRate::Auto { horizon } => {
                optimal_learning_rate(self.cache_size, NUM_EXPERTS, horizon)
            }
            LearningRate::AutoStream => optimal_learning_rate(self.cache_size, NUM_EXPERTS, 1),
        }
    }
}

/// `(0.005^(1/K))^d`, computed as `0.005^(d/K)`.
pub fn legacy_cost(delay: u64, cache_size: usize) -> f64 {
    libm::pow(LEGACY_DISCOUNT_BASE, delay as f64 / cache_size as f64)
}

/// Feedback resolved while serving a request.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedFeedback<K> {
    /// Requested key found in the history.
    pub key: K,
    /// History position.
    pub delay: u64,
    /// Estimated cost `x̂` at the evicted slot.
    pub estimate: f64,
    /// Cost charged to each expert, `x̂ * ξ_i`.
    pub expert_costs: Vec<f64>,
}

/// What happened while serving one request.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestOutcome<K> {
    /// Round passed by the caller.
    pub round: u64,
    /// Requested key.
    pub key: K,
    /// Whether the key was resident.
    pub hit: bool,
    /// Evicted key, if an eviction happened.
    pub evicted: Option<K>,
    /// Feedback applied to the weights, if any.
    pub feedback_applied: Option<AppliedFeedback<K>>,
    /// Expert weights after the request.
    pub weights_after: Vec<f64>,
}

/// The learning cache.
#[derive(Debug, Clone)]
pub struct Engine<K> {
    config: EngineConfig,
    cache: CacheState<K>,
    history: EvictionHistory<K>,
    state: WeightState,
    rng: DetRng,
    requests: u64,
}

impl<K: Ord + Clone> Engine<K> {
    /// Fresh engine: unit weights, empty cache and history.
    pub fn new(config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let eta = config.initial_eta()?;
        Ok(Engine {
            cache: CacheState::new(config.cache_size)?,
            history: EvictionHistory::new(config.history_size)?,
            state: WeightState::new(NUM_EXPERTS, config.cache_size, eta)?,
            rng: DetRng::new(config.seed),
            requests: 0,
            config,
        })
    }

    /// Configuration.
    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Expert weights `[lru, lfu]`.
    pub fn weights(&self) -> &[f64] {
        self.state.weights()
    }

    /// Normalized expert weights `[lru, lfu]`.
    pub fn expert_probabilities(&self) -> Vec<f64> {
        self.state.expert_probabilities()
    }

    /// Current learning rate.
    pub fn eta(&self) -> f64 {
        self.state.eta()
    }

    /// Cache contents.
    pub fn cache(&self) -> &CacheState<K> {
        &self.cache
    }

    /// Eviction history.
    pub fn history(&self) -> &EvictionHistory<K> {
        &self.history
    }

    /// Requests served so far.
    pub fn requests(&self) -> u64 {
        self.requests
    }

    fn advance_schedule(&mut self) -> Result<()> {
        if self.config.learning_rate == LearningRate::AutoStream && self.requests.is_power_of_two() {
            let eta = optimal_learning_rate(self.config.cache_size, NUM_EXPERTS, self.requests)?;
            self.state.set_eta(eta)?;
        }
        Ok(())
    }

    fn feedback_estimate(&self, delay: u64, rec: &EvictionRecord<K>) -> Result<f64> {
        let k = self.config.cache_size;
        match self.config.cost_mode {
            CostMode::Dfdc => {
                let fb = DelayedFeedback {
                    action: rec.slot,
                    raw_cost: MISS_COST,
                    delay,
                    threshold: self.config.history_size as u64,
                    acting_prob: rec.acting_prob,
                };
                Ok(estimate_cost(&fb, k, self.config.estimator)?.get(rec.slot))
            }
            CostMode::Legacy => {
                if delay > self.config.history_size as u64 {
                    return Ok(0.0);
                }
                adjust_decayed_cost(legacy_cost(delay, k), rec.acting_prob, self.config.estimator)
            }
        }
    }

    /// Serve one request.
    ///
    /// A hit only refreshes the cache. A miss resolves history feedback for the
    /// requested key (if present), samples a victim with the weights as they
    /// were before that feedback, applies the feedback, evicts, inserts and
    /// records the eviction.
    pub fn process_request(&mut self, key: K, round: u64) -> Result<RequestOutcome<K>> {
        self.requests += 1;
        self.advance_schedule()?;

        if self.cache.access(&key, round) == Access::Hit {
            return Ok(RequestOutcome {
                round,
                key,
                hit: true,
                evicted: None,
                feedback_applied: None,
                weights_after: self.state.weights().to_vec(),
            });
        }

        let resolved = self.history.take(&key);

        let victim = if self.cache.is_full() {
            let lru = self.cache.lru_advise()?;
            let lfu = self.cache.lfu_advise()?;
            let advice = AdviceMatrix::one_hot(self.config.cache_size, &[lru, lfu])?;
            let dist = self.state.action_distribution(&advice)?;
            let slot = dist.sample(&mut self.rng);
            Some((slot, dist.prob(slot), advice.column(slot)))
        } else {
            None
        };

        let feedback_applied = match resolved {
            Some((delay, rec)) => {
                let estimate = self.feedback_estimate(delay, &rec)?;
                let expert_costs: Vec<f64> = rec.expert_match.iter().map(|m| estimate * m).collect();
                if estimate > 0.0 {
                    self.state.apply_expert_costs(&expert_costs)?;
                    self.state.renormalize_if_needed();
                }
                Some(AppliedFeedback {
                    key: rec.key,
                    delay,
                    estimate,
                    expert_costs,
                })
            }
            None => None,
        };

        let evicted = match victim {
            Some((slot, acting_prob, expert_match)) => {
                let victim_key = self
                    .cache
                    .key_at(slot)
                    .cloned()
                    .ok_or(Error::VictimNotResident)?;
                let (_, evicted) = self.cache.insert_with_eviction(key.clone(), Some(&victim_key), round)?;
                self.history.record(EvictionRecord {
                    key: victim_key,
                    round_evicted: round,
                    expert_match,
                    acting_prob,
                    slot,
                });
                evicted
            }
            None => {
                self.cache.insert_with_eviction(key.clone(), None, round)?;
                None
            }
        };

        Ok(RequestOutcome {
            round,
            key,
            hit: false,
            evicted,
            feedback_applied,
            weights_after: self.state.weights().to_vec(),
        })
    }

    /// Serve a whole trace, numbering rounds after the requests already served.
    pub fn run_trace(&mut self, trace: &[K]) -> Result<MetricsSeries> {
        if trace.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let mut recorder = MetricsRecorder::new(trace.len() as u64);
        for key in trace {
            let round = self.requests + 1;
            let outcome = self.process_request(key.clone(), round)?;
            let cost = if outcome.hit { 0.0 } else { MISS_COST };
            recorder.push(cost, Some(outcome.hit), &outcome.weights_after);
        }
        Ok(recorder.finish())
    }
}
