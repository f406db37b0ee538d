//! Expert-advice bandit with delayed feedback and decaying costs.
//!
//! A round consults `N` experts, each recommending a probability vector over
//! `K` actions ([`AdviceMatrix`]). The player mixes the advice with its expert
//! weights and a uniform exploration floor of `eta / K`
//! ([`WeightState::action_distribution`]) and samples an action. Feedback for
//! that action may arrive later; its cost decays with the delay `d` and is
//! dropped entirely beyond the threshold `m` ([`estimate_cost`]). Each expert
//! is then charged the estimate projected on its own advice for the original
//! round, through an exponential update ([`WeightState::update_weights`]).
//!
//! Action and expert indices are 0-based throughout.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::rng::DetRng;

/// Tolerance for probability vectors summing to one.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Weights are rescaled once the largest one drops below this value.
pub const RENORMALIZE_BELOW: f64 = 1e-100;

/// Expert weights plus the learning rate and problem dimensions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightState {
    weights: Vec<f64>,
    eta: f64,
    num_actions: usize,
    round: u64,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(invalid("eta", format!("{eta} is outside (0, 1]")))
    }
}

impl WeightState {
    /// Unit weights for `num_experts` experts over `num_actions` actions, at round 1.
    pub fn new(num_experts: usize, num_actions: usize, eta: f64) -> Result<Self> {
        if num_experts == 0 {
            return Err(invalid("num_experts", "must be at least 1"));
        }
        if num_actions == 0 {
            return Err(invalid("num_actions", "must be at least 1"));
        }
        check_eta(eta)?;
        Ok(WeightState {
            weights: vec![1.0; num_experts],
            eta,
            num_actions,
            round: 1,
        })
    }

    /// Expert weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the weights.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Normalized weights `w_i / W`.
    pub fn expert_probabilities(&self) -> Vec<f64> {
        let total = self.total_weight();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// Learning rate.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Replace the learning rate (used by horizon-doubling schedules).
    pub fn set_eta(&mut self, eta: f64) -> Result<()> {
        check_eta(eta)?;
        self.eta = eta;
        Ok(())
    }

    /// Number of experts `N`.
    pub fn num_experts(&self) -> usize {
        self.weights.len()
    }

    /// Number of actions `K`.
    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Round counter; starts at 1 and advances on every weight update.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Mixed action distribution for the given advice.
    pub fn action_distribution(&self, advice: &AdviceMatrix) -> Result<ActionDistribution> {
        if advice.num_actions() != self.num_actions {
            return Err(Error::DimensionMismatch {
                what: "actions",
                expected: self.num_actions,
                found: advice.num_actions(),
            });
        }
        mix_advice(&self.weights, self.eta, advice)
    }

    /// Exponential update from a cost estimate and the advice of the round the
    /// estimate refers to.
    pub fn update_weights(&mut self, estimate: &CostEstimate, advice: &AdviceMatrix) -> Result<()> {
        if advice.num_experts() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                what: "experts",
                expected: self.weights.len(),
                found: advice.num_experts(),
            });
        }
        if advice.num_actions() != self.num_actions || estimate.num_actions() != self.num_actions {
            return Err(Error::DimensionMismatch {
                what: "actions",
                expected: self.num_actions,
                found: if advice.num_actions() != self.num_actions {
                    advice.num_actions()
                } else {
                    estimate.num_actions()
                },
            });
        }
        let costs: Vec<f64> = (0..self.weights.len())
            .map(|i| estimate.dot(advice.row(i)))
            .collect();
        self.apply_expert_costs(&costs)
    }

    /// Exponential update from per-expert costs `c_i = x̂ · ξ_i`:
    /// `w_i <- w_i * exp(-eta * c_i / K)`.
    ///
    /// Weights are left untouched if any resulting weight would be zero or
    /// non-finite.
    pub fn apply_expert_costs(&mut self, costs: &[f64]) -> Result<()> {
        if costs.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                what: "experts",
                expected: self.weights.len(),
                found: costs.len(),
            });
        }
        let scale = self.eta / self.num_actions as f64;
        let updated: Vec<f64> = self
            .weights
            .iter()
            .zip(costs)
            .map(|(w, c)| w * libm::exp(-scale * c))
            .collect();
        if let Some((expert, &value)) = updated
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::NonFiniteWeight { expert, value });
        }
        self.weights = updated;
        self.round += 1;
        Ok(())
    }

    /// Divide every weight by the largest one.
    pub fn renormalize(&mut self) {
        let max = self.weights.iter().copied().fold(f64::MIN, f64::max);
        if max > 0.0 && max.is_finite() {
            for w in &mut self.weights {
                *w /= max;
            }
        }
    }

    /// Renormalize when the largest weight has dropped below
    /// [`RENORMALIZE_BELOW`]. Returns whether it did.
    pub fn renormalize_if_needed(&mut self) -> bool {
        let max = self.weights.iter().copied().fold(f64::MIN, f64::max);
        if max < RENORMALIZE_BELOW {
            self.renormalize();
            true
        } else {
            false
        }
    }
}

/// Per-round expert recommendations: `N` rows, each a probability vector over
/// `K` actions. Stored row-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdviceMatrix {
    num_experts: usize,
    num_actions: usize,
    data: Vec<f64>,
}

impl AdviceMatrix {
    /// Build from row-major data, validating every row.
    pub fn new(num_experts: usize, num_actions: usize, data: Vec<f64>) -> Result<Self> {
        if num_experts == 0 || num_actions == 0 {
            return Err(invalid("advice", "needs at least one expert and one action"));
        }
        if data.len() != num_experts * num_actions {
            return Err(Error::DimensionMismatch {
                what: "advice entries",
                expected: num_experts * num_actions,
                found: data.len(),
            });
        }
        for (i, row) in data.chunks(num_actions).enumerate() {
            check_probability_vector(row).map_err(|e| match e {
                Error::NotAProbabilityVector(msg) => {
                    Error::NotAProbabilityVector(format!("advice row {i}: {msg}"))
                }
                other => other,
            })?;
        }
        Ok(AdviceMatrix {
            num_experts,
            num_actions,
            data,
        })
    }

    /// One-hot advice: expert `i` recommends action `actions[i]`.
    pub fn one_hot(num_actions: usize, actions: &[usize]) -> Result<Self> {
        if actions.is_empty() || num_actions == 0 {
            return Err(invalid("advice", "needs at least one expert and one action"));
        }
        let mut data = vec![0.0; actions.len() * num_actions];
        for (i, &a) in actions.iter().enumerate() {
            if a >= num_actions {
                return Err(invalid("advice", format!("action {a} out of range 0..{num_actions}")));
            }
            data[i * num_actions + a] = 1.0;
        }
        Ok(AdviceMatrix {
            num_experts: actions.len(),
            num_actions,
            data,
        })
    }

    /// Number of experts `N`.
    pub fn num_experts(&self) -> usize {
        self.num_experts
    }

    /// Number of actions `K`.
    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Advice vector of expert `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.num_actions..(i + 1) * self.num_actions]
    }

    /// Probability expert `expert` places on `action`.
    pub fn get(&self, expert: usize, action: usize) -> f64 {
        self.data[expert * self.num_actions + action]
    }

    /// Column `action`: how much each expert recommended that action.
    pub fn column(&self, action: usize) -> Vec<f64> {
        (0..self.num_experts).map(|i| self.get(i, action)).collect()
    }
}

fn check_probability_vector(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
        return Err(Error::NotAProbabilityVector(format!("entry {bad} outside [0, 1]")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::NotAProbabilityVector(format!("sums to {sum}")));
    }
    Ok(())
}

/// Probability of taking each action in a round.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    /// Wrap an explicit probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("distribution", "empty"));
        }
        check_probability_vector(&probs)?;
        Ok(ActionDistribution { probs })
    }

    /// Probabilities, indexed by action.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `action`.
    pub fn prob(&self, action: usize) -> f64 {
        self.probs[action]
    }

    /// Number of actions.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// Always false; a distribution has at least one action.
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Draw an action by inverting the cumulative distribution with a
    /// left-to-right scan over a single uniform draw.
    pub fn sample(&self, rng: &mut DetRng) -> usize {
        self.sample_with(rng.next_f64())
    }

    /// Inversion for a given uniform `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut cumulative = 0.0;
        for (j, &p) in self.probs.iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                return j;
            }
        }
        // Rounding left `u` past the accumulated mass.
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// `p_j = (1 - eta) * sum_i w_i * xi_i^j / W + eta / K`.
///
/// Unlike [`WeightState`], `eta = 0` is accepted here (pure exploitation).
pub fn mix_advice(weights: &[f64], eta: f64, advice: &AdviceMatrix) -> Result<ActionDistribution> {
    if weights.len() != advice.num_experts() {
        return Err(Error::DimensionMismatch {
            what: "experts",
            expected: weights.len(),
            found: advice.num_experts(),
        });
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", format!("{eta} is outside [0, 1]")));
    }
    let k = advice.num_actions();
    let total: f64 = weights.iter().sum();
    let floor = eta / k as f64;
    let mut probs = vec![0.0; k];
    for (i, w) in weights.iter().enumerate() {
        let share = w / total;
        if share == 0.0 {
            continue;
        }
        for (p, xi) in probs.iter_mut().zip(advice.row(i)) {
            *p += share * xi;
        }
    }
    for p in &mut probs {
        *p = (1.0 - eta) * *p + floor;
    }
    Ok(ActionDistribution { probs })
}

/// A resolved feedback event for an action taken in an earlier round.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DelayedFeedback {
    /// Action the feedback refers to.
    pub action: usize,
    /// Undecayed cost in `[0, 1]`.
    pub raw_cost: f64,
    /// Delay `d >= 1`.
    pub delay: u64,
    /// Threshold `m`; feedback with `d > m` carries no cost.
    pub threshold: u64,
    /// Probability with which the action was taken.
    pub acting_prob: f64,
}

impl DelayedFeedback {
    fn validate(&self) -> Result<()> {
        if self.delay == 0 {
            return Err(invalid("delay", "must be at least 1"));
        }
        if self.threshold == 0 {
            return Err(invalid("threshold", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.raw_cost) {
            return Err(invalid("raw_cost", format!("{} is outside [0, 1]", self.raw_cost)));
        }
        if !(0.0..=1.0).contains(&self.acting_prob) {
            return Err(invalid("acting_prob", format!("{} is outside [0, 1]", self.acting_prob)));
        }
        Ok(())
    }
}

/// How a decayed cost is turned into an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorOptions {
    /// Divide by the acting probability (unbiased estimate).
    pub importance_weighting: bool,
    /// Clamp the estimate to at most 1. Breaks unbiasedness.
    pub cap: bool,
}

impl EstimatorOptions {
    /// Importance weighting on, no cap.
    pub const IMPORTANCE_WEIGHTED: Self = EstimatorOptions {
        importance_weighting: true,
        cap: false,
    };
    /// Plain decayed cost, no cap.
    pub const PLAIN: Self = EstimatorOptions {
        importance_weighting: false,
        cap: false,
    };
}

/// Estimated cost vector for one round. At most one entry is non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostEstimate {
    num_actions: usize,
    entry: Option<(usize, f64)>,
}

impl CostEstimate {
    /// All-zero estimate.
    pub fn zero(num_actions: usize) -> Self {
        CostEstimate {
            num_actions,
            entry: None,
        }
    }

    /// Estimate `value` at `action`, zero elsewhere.
    pub fn single(num_actions: usize, action: usize, value: f64) -> Result<Self> {
        if action >= num_actions {
            return Err(invalid("action", format!("{action} out of range 0..{num_actions}")));
        }
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid("estimate", format!("{value} is not a non-negative number")));
        }
        Ok(CostEstimate {
            num_actions,
            entry: (value != 0.0).then_some((action, value)),
        })
    }

    /// Number of actions `K`.
    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Non-zero entry, if any.
    pub fn entry(&self) -> Option<(usize, f64)> {
        self.entry
    }

    /// Value at `action`.
    pub fn get(&self, action: usize) -> f64 {
        match self.entry {
            Some((a, v)) if a == action => v,
            _ => 0.0,
        }
    }

    /// Dense form.
    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.num_actions).map(|a| self.get(a)).collect()
    }

    /// Inner product with an advice vector.
    pub fn dot(&self, advice: &[f64]) -> f64 {
        match self.entry {
            Some((a, v)) => v * advice[a],
            None => 0.0,
        }
    }
}

/// Turn a decayed cost into an estimate value: optionally divide by the
/// acting probability, optionally clamp to 1.
pub fn adjust_decayed_cost(decayed: f64, acting_prob: f64, options: EstimatorOptions) -> Result<f64> {
    let mut value = decayed;
    if options.importance_weighting {
        if acting_prob <= 0.0 {
            return Err(Error::ZeroActingProbability);
        }
        value /= acting_prob;
    }
    if options.cap {
        value = value.min(1.0);
    }
    Ok(value)
}

/// Estimated cost of a delayed feedback over `num_actions` actions.
///
/// Zero if `d > m`; otherwise `x / (d * p)` with importance weighting, `x / d`
/// without, optionally clamped to 1.
pub fn estimate_cost(
    feedback: &DelayedFeedback,
    num_actions: usize,
    options: EstimatorOptions,
) -> Result<CostEstimate> {
    feedback.validate()?;
    if feedback.delay > feedback.threshold {
        if feedback.action >= num_actions {
            return Err(invalid("action", format!("{} out of range 0..{num_actions}", feedback.action)));
        }
        return Ok(CostEstimate::zero(num_actions));
    }
    let decayed = feedback.raw_cost / feedback.delay as f64;
    let value = adjust_decayed_cost(decayed, feedback.acting_prob, options)?;
    CostEstimate::single(num_actions, feedback.action, value)
}

/// Learning rate minimizing the EXP4-DFDC bound:
/// `min(1, sqrt(K ln N / (2T)))`. Needs `N >= 2`.
pub fn optimal_learning_rate(num_actions: usize, num_experts: usize, horizon: u64) -> Result<f64> {
    if num_actions == 0 {
        return Err(invalid("num_actions", "must be at least 1"));
    }
    if num_experts < 2 {
        return Err(invalid("num_experts", "at least 2 experts are needed for the optimal rate"));
    }
    if horizon == 0 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    let k = num_actions as f64;
    let ln_n = libm::log(num_experts as f64);
    Ok(libm::sqrt(k * ln_n / (2.0 * horizon as f64)).min(1.0))
}

/// Algorithms with a closed-form regret bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundFamily {
    /// Classic EXP4: `(e - 1) eta T + K ln N / eta`.
    Exp4,
    /// Delayed feedback, decaying cost: `2 eta T + K ln N / eta`.
    Exp4Dfdc,
}

/// Closed-form regret bound after `horizon` rounds.
pub fn regret_bound(
    eta: f64,
    num_actions: usize,
    num_experts: usize,
    horizon: u64,
    family: BoundFamily,
) -> f64 {
    let k = num_actions as f64;
    let ln_n = libm::log(num_experts as f64);
    let t = horizon as f64;
    let slope = match family {
        BoundFamily::Exp4 => core::f64::consts::E - 1.0,
        BoundFamily::Exp4Dfdc => 2.0,
    };
    slope * eta * t + k * ln_n / eta
}

/// Bound at the optimal learning rate: `2 sqrt(2 K T ln N)`.
pub fn optimal_regret_bound(num_actions: usize, num_experts: usize, horizon: u64) -> f64 {
    let k = num_actions as f64;
    let ln_n = libm::log(num_experts as f64);
    2.0 * libm::sqrt(2.0 * k * horizon as f64 * ln_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn init_examples() {
        assert_eq!(WeightState::new(2, 2, 0.5).unwrap().weights(), &[1.0, 1.0]);
        assert_eq!(WeightState::new(1, 1, 1.0).unwrap().weights(), &[1.0]);
        let s = WeightState::new(5, 10, 0.1).unwrap();
        assert_eq!(s.weights(), &[1.0; 5]);
        assert_eq!(s.round(), 1);
    }

    #[test]
    fn init_rejects_bad_params() {
        assert!(WeightState::new(0, 2, 0.5).is_err());
        assert!(WeightState::new(2, 0, 0.5).is_err());
        assert!(WeightState::new(2, 2, 0.0).is_err());
        assert!(WeightState::new(2, 2, 1.5).is_err());
        assert!(WeightState::new(2, 2, f64::NAN).is_err());
    }

    #[test]
    fn pure_exploitation_single_expert() {
        let advice = AdviceMatrix::one_hot(4, &[2]).unwrap();
        let p = mix_advice(&[1.0], 0.0, &advice).unwrap();
        assert_eq!(p.probs(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn pure_exploration() {
        let advice = AdviceMatrix::one_hot(4, &[0, 3]).unwrap();
        let s = WeightState::new(2, 4, 1.0).unwrap();
        let p = s.action_distribution(&advice).unwrap();
        assert_eq!(p.probs(), &[0.25; 4]);
    }

    #[test]
    fn weighted_mix_hand_value() {
        // 0.8 * 3/4 + 0.1 and 0.8 * 1/4 + 0.1
        let advice = AdviceMatrix::one_hot(2, &[0, 1]).unwrap();
        let p = mix_advice(&[3.0, 1.0], 0.2, &advice).unwrap();
        assert_abs_diff_eq!(p.prob(0), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p.prob(1), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn distribution_dimension_mismatch() {
        let s = WeightState::new(2, 3, 0.5).unwrap();
        assert!(matches!(
            s.action_distribution(&AdviceMatrix::one_hot(4, &[0, 1]).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            s.action_distribution(&AdviceMatrix::one_hot(3, &[0, 1, 2]).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn advice_rows_must_be_distributions() {
        assert!(AdviceMatrix::new(1, 2, vec![0.5, 0.4]).is_err());
        assert!(AdviceMatrix::new(1, 2, vec![1.5, -0.5]).is_err());
        assert!(AdviceMatrix::new(1, 2, vec![0.5, 0.5]).is_ok());
        assert!(AdviceMatrix::one_hot(2, &[2]).is_err());
    }

    #[test]
    fn degenerate_sample() {
        let d = ActionDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let mut rng = DetRng::new(0);
        for _ in 0..1000 {
            assert_eq!(d.sample(&mut rng), 0);
        }
        // zero-mass tail is never chosen even at u close to 1
        let d = ActionDistribution::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(d.sample_with(0.999_999_999_999), 1);
        assert_eq!(d.sample_with(0.0), 1);
    }

    #[test]
    fn fair_coin_frequency() {
        let d = ActionDistribution::new(vec![0.5, 0.5]).unwrap();
        let mut rng = DetRng::new(2024);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| d.sample(&mut rng) == 0).count();
        let freq = ones as f64 / n as f64;
        assert!((0.4985..=0.5015).contains(&freq), "freq {freq}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = ActionDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let run = |seed| {
            let mut rng = DetRng::new(seed);
            (0..200).map(|_| d.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
    }

    fn fb(x: f64, d: u64, p: f64) -> DelayedFeedback {
        DelayedFeedback {
            action: 1,
            raw_cost: x,
            delay: d,
            threshold: 10,
            acting_prob: p,
        }
    }

    #[test]
    fn estimate_examples() {
        let e = estimate_cost(&fb(1.0, 1, 1.0), 3, EstimatorOptions::IMPORTANCE_WEIGHTED).unwrap();
        assert_eq!(e.to_vec(), vec![0.0, 1.0, 0.0]);

        let e = estimate_cost(&fb(1.0, 4, 0.5), 3, EstimatorOptions::IMPORTANCE_WEIGHTED).unwrap();
        assert_abs_diff_eq!(e.get(1), 0.5, epsilon = 1e-15);

        let e = estimate_cost(&fb(1.0, 11, 0.5), 3, EstimatorOptions::IMPORTANCE_WEIGHTED).unwrap();
        assert_eq!(e.to_vec(), vec![0.0; 3]);

        let e = estimate_cost(&fb(0.8, 4, 0.3), 3, EstimatorOptions::PLAIN).unwrap();
        assert_abs_diff_eq!(e.get(1), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn estimate_cap_and_errors() {
        let capped = EstimatorOptions {
            importance_weighting: true,
            cap: true,
        };
        let e = estimate_cost(&fb(1.0, 1, 0.25), 3, capped).unwrap();
        assert_eq!(e.get(1), 1.0);
        assert_eq!(
            estimate_cost(&fb(1.0, 1, 0.0), 3, EstimatorOptions::IMPORTANCE_WEIGHTED),
            Err(Error::ZeroActingProbability)
        );
        // without weighting a zero snapshot is harmless
        assert!(estimate_cost(&fb(1.0, 1, 0.0), 3, EstimatorOptions::PLAIN).is_ok());
        assert!(estimate_cost(&fb(1.0, 0, 0.5), 3, EstimatorOptions::PLAIN).is_err());
        assert!(estimate_cost(&fb(1.5, 1, 0.5), 3, EstimatorOptions::PLAIN).is_err());
    }

    #[test]
    fn update_examples() {
        let advice = AdviceMatrix::one_hot(2, &[0, 1]).unwrap();
        let mut s = WeightState::new(2, 2, 0.5).unwrap();
        s.update_weights(&CostEstimate::zero(2), &advice).unwrap();
        assert_eq!(s.weights(), &[1.0, 1.0]);
        assert_eq!(s.round(), 2);

        let est = CostEstimate::single(2, 0, 1.0).unwrap();
        s.update_weights(&est, &advice).unwrap();
        assert_abs_diff_eq!(s.weights()[0], 0.778_800_783_071_404_9, epsilon = 1e-12);
        assert_eq!(s.weights()[1], 1.0);

        let same = AdviceMatrix::one_hot(2, &[1, 1]).unwrap();
        let mut s = WeightState::new(2, 2, 0.5).unwrap();
        s.update_weights(&CostEstimate::single(2, 1, 0.7).unwrap(), &same).unwrap();
        assert_eq!(s.weights()[0], s.weights()[1]);
    }

    #[test]
    fn update_rejects_underflow() {
        let mut s = WeightState::new(2, 1, 1.0).unwrap();
        assert!(matches!(
            s.apply_expert_costs(&[1e6, 0.0]),
            Err(Error::NonFiniteWeight { expert: 0, .. })
        ));
        assert_eq!(s.weights(), &[1.0, 1.0]);
        assert!(s.apply_expert_costs(&[1.0]).is_err());
    }

    #[test]
    fn renormalize_examples() {
        let mut s = WeightState::new(2, 2, 0.5).unwrap();
        s.weights = vec![1e-300, 2e-300];
        s.renormalize();
        assert_abs_diff_eq!(s.weights()[0], 0.5, epsilon = 1e-15);
        assert_eq!(s.weights()[1], 1.0);

        let mut s = WeightState::new(2, 2, 0.5).unwrap();
        s.renormalize();
        assert_eq!(s.weights(), &[1.0, 1.0]);
        assert!(!s.renormalize_if_needed());
        s.weights = vec![1e-101, 1e-102];
        assert!(s.renormalize_if_needed());
        assert_eq!(s.weights()[0], 1.0);
    }

    #[test]
    fn optimal_rate_examples() {
        assert_abs_diff_eq!(optimal_learning_rate(2, 2, 1).unwrap(), 0.832_555, epsilon = 1e-6);
        assert_eq!(optimal_learning_rate(100, 2, 1).unwrap(), 1.0);
        assert_abs_diff_eq!(
            optimal_learning_rate(100, 2, 1_000_000).unwrap(),
            0.005_887_050_1,
            epsilon = 1e-7
        );
        assert!(optimal_learning_rate(2, 1, 10).is_err());
        assert!(optimal_learning_rate(2, 2, 0).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_abs_diff_eq!(
            regret_bound(1.0, 2, 2, 100, BoundFamily::Exp4Dfdc),
            201.386_294_361_119_9,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            regret_bound(1.0, 2, 2, 100, BoundFamily::Exp4),
            173.214_477_207_024_4,
            epsilon = 1e-9
        );
        let eta = optimal_learning_rate(2, 2, 100).unwrap();
        let at_opt = regret_bound(eta, 2, 2, 100, BoundFamily::Exp4Dfdc);
        let closed = optimal_regret_bound(2, 2, 100);
        assert_abs_diff_eq!(closed, 33.302_184_446_307_91, epsilon = 1e-9);
        assert!(at_opt <= closed + 1e-9);
    }

    fn state_and_advice() -> impl Strategy<Value = (Vec<f64>, f64, usize, Vec<usize>)> {
        (1usize..6, 1usize..8).prop_flat_map(|(n, k)| {
            (
                proptest::collection::vec(1e-6f64..1e6, n),
                0.0f64..=1.0,
                Just(k),
                proptest::collection::vec(0..k, n),
            )
        })
    }

    proptest! {
        #[test]
        fn simplex_and_floor((w, eta, k, acts) in state_and_advice()) {
            let advice = AdviceMatrix::one_hot(k, &acts).unwrap();
            let p = mix_advice(&w, eta, &advice).unwrap();
            let sum: f64 = p.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            for &pj in p.probs() {
                prop_assert!(pj >= eta / k as f64 - 1e-12);
            }
        }

        #[test]
        fn scale_invariance((w, eta, k, acts) in state_and_advice(), c in 1e-200f64..1e200) {
            let advice = AdviceMatrix::one_hot(k, &acts).unwrap();
            let p = mix_advice(&w, eta, &advice).unwrap();
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            let q = mix_advice(&scaled, eta, &advice).unwrap();
            for (a, b) in p.probs().iter().zip(q.probs()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn renormalize_keeps_distribution((w, eta, k, acts) in state_and_advice()) {
            let advice = AdviceMatrix::one_hot(k, &acts).unwrap();
            let mut s = WeightState::new(w.len(), k, eta.max(1e-3)).unwrap();
            s.weights = w;
            let before = s.action_distribution(&advice).unwrap();
            s.renormalize();
            let after = s.action_distribution(&advice).unwrap();
            for (a, b) in before.probs().iter().zip(after.probs()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn weights_never_increase(
            (w, eta, k, acts) in state_and_advice(),
            action_seed in 0usize..64,
            value in 0.0f64..50.0,
        ) {
            let advice = AdviceMatrix::one_hot(k, &acts).unwrap();
            let mut s = WeightState::new(w.len(), k, eta.max(1e-3)).unwrap();
            s.weights = w;
            let before = s.weights().to_vec();
            let est = CostEstimate::single(k, action_seed % k, value).unwrap();
            s.update_weights(&est, &advice).unwrap();
            for (a, b) in before.iter().zip(s.weights()) {
                prop_assert!(b <= a);
            }
        }

        #[test]
        fn zero_estimate_is_identity((w, eta, k, acts) in state_and_advice()) {
            let advice = AdviceMatrix::one_hot(k, &acts).unwrap();
            let mut s = WeightState::new(w.len(), k, eta.max(1e-3)).unwrap();
            s.weights = w.clone();
            s.update_weights(&CostEstimate::zero(k), &advice).unwrap();
            prop_assert_eq!(s.weights(), &w[..]);
        }
    }
}
