//! Synthetic oblivious bandit environments.
//!
//! Every draw is a pure function of `(seed, round, arm)`, so the cost table is
//! fixed before play starts and does not react to the learner.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::{counter_hash, counter_uniform};

const DELAY_STREAM: u64 = u64::MAX;
const DELAY_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// One segment of a switching schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanPhase {
    /// First round (1-based) of this segment.
    pub start: u64,
    /// Mean cost of every arm.
    pub means: Vec<f64>,
}

/// How mean costs evolve over rounds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CostSchedule {
    /// Fixed per-arm means.
    Stochastic {
        /// Mean cost per arm.
        means: Vec<f64>,
    },
    /// Piecewise-constant means. The first phase starts at round 1.
    Switching {
        /// Segments in increasing start order.
        phases: Vec<MeanPhase>,
    },
}

/// Delay between an action and its feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DelayModel {
    /// Always `d`.
    Fixed(u64),
    /// Uniform in `[1, max]`.
    Uniform {
        /// Largest delay.
        max: u64,
    },
}

/// Full description of an environment, minus the seed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvSpec {
    /// Mean costs.
    pub schedule: CostSchedule,
    /// Delay model.
    pub delay: DelayModel,
    /// Feedback with delay above this is dropped.
    pub threshold: u64,
}

impl EnvSpec {
    /// Stochastic environment with uniform delays in `[1, m]` and threshold `m`.
    pub fn stochastic(means: Vec<f64>, max_delay: u64) -> Self {
        EnvSpec {
            schedule: CostSchedule::Stochastic { means },
            delay: DelayModel::Uniform { max: max_delay },
            threshold: max_delay,
        }
    }

    /// Two-phase environment: `means` until `switch_at - 1`, then the same
    /// means with arms 0 and 1 exchanged.
    pub fn swapped_at(means: Vec<f64>, switch_at: u64, max_delay: u64) -> Self {
        let mut swapped = means.clone();
        if swapped.len() >= 2 {
            swapped.swap(0, 1);
        }
        EnvSpec {
            schedule: CostSchedule::Switching {
                phases: alloc::vec![
                    MeanPhase { start: 1, means },
                    MeanPhase {
                        start: switch_at,
                        means: swapped,
                    },
                ],
            },
            delay: DelayModel::Uniform { max: max_delay },
            threshold: max_delay,
        }
    }

    /// Number of arms.
    pub fn num_arms(&self) -> usize {
        match &self.schedule {
            CostSchedule::Stochastic { means } => means.len(),
            CostSchedule::Switching { phases } => phases.first().map_or(0, |p| p.means.len()),
        }
    }

    fn validate(&self) -> Result<()> {
        let check_means = |means: &[f64]| -> Result<()> {
            if means.is_empty() {
                return Err(Error::InvalidSpec("environment needs at least one arm".into()));
            }
            if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
                return Err(Error::InvalidSpec(format!("mean cost {m} outside [0, 1]")));
            }
            Ok(())
        };
        match &self.schedule {
            CostSchedule::Stochastic { means } => check_means(means)?,
            CostSchedule::Switching { phases } => {
                let first = phases
                    .first()
                    .ok_or_else(|| Error::InvalidSpec("switching schedule has no phases".into()))?;
                if first.start != 1 {
                    return Err(Error::InvalidSpec("first phase must start at round 1".into()));
                }
                for p in phases {
                    check_means(&p.means)?;
                    if p.means.len() != first.means.len() {
                        return Err(Error::InvalidSpec("phases disagree on the number of arms".into()));
                    }
                }
                if phases.windows(2).any(|w| w[1].start <= w[0].start) {
                    return Err(Error::InvalidSpec("switch rounds must be strictly increasing".into()));
                }
            }
        }
        match self.delay {
            DelayModel::Fixed(0) | DelayModel::Uniform { max: 0 } => {
                return Err(Error::InvalidSpec("delays must be at least 1".into()))
            }
            _ => {}
        }
        if self.threshold == 0 {
            return Err(Error::InvalidSpec("threshold must be at least 1".into()));
        }
        Ok(())
    }
}

/// A seeded environment.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnvironment {
    spec: EnvSpec,
    seed: u64,
}

/// Validate `spec` and bind it to `seed`.
pub fn gen_environment(spec: EnvSpec, seed: u64) -> Result<BanditEnvironment> {
    spec.validate()?;
    Ok(BanditEnvironment { spec, seed })
}

impl BanditEnvironment {
    /// Specification.
    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    /// Seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of arms.
    pub fn num_arms(&self) -> usize {
        self.spec.num_arms()
    }

    /// Delay threshold.
    pub fn threshold(&self) -> u64 {
        self.spec.threshold
    }

    /// Means in effect at `round`.
    pub fn means_at(&self, round: u64) -> &[f64] {
        match &self.spec.schedule {
            CostSchedule::Stochastic { means } => means,
            CostSchedule::Switching { phases } => {
                let idx = phases.partition_point(|p| p.start <= round).saturating_sub(1);
                &phases[idx].means
            }
        }
    }

    /// Bernoulli cost of `arm` at `round`.
    pub fn raw_cost(&self, round: u64, arm: usize) -> f64 {
        let mean = self.means_at(round)[arm];
        if counter_uniform(self.seed, round, arm as u64) < mean {
            1.0
        } else {
            0.0
        }
    }

    /// Feedback delay of an action taken at `round`.
    pub fn delay(&self, round: u64) -> u64 {
        match self.spec.delay {
            DelayModel::Fixed(d) => d,
            DelayModel::Uniform { max } => {
                let h = counter_hash(self.seed ^ DELAY_SALT, round, DELAY_STREAM);
                1 + ((h as u128 * max as u128) >> 64) as u64
            }
        }
    }

    /// Decay factor at `round`: `1 / d`, or 0 past the threshold.
    pub fn decay(&self, round: u64) -> f64 {
        let d = self.delay(round);
        if d > self.spec.threshold {
            0.0
        } else {
            1.0 / d as f64
        }
    }

    /// Cost of `arm` at `round` after decay; this is what the delayed estimator
    /// is unbiased for.
    pub fn effective_cost(&self, round: u64, arm: usize) -> f64 {
        self.raw_cost(round, arm) * self.decay(round)
    }
}
