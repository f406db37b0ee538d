//! Run configurations. A report embeds the configuration it was produced
//! from, and that echo is enough to run it again.

use std::fmt;
use std::str::FromStr;

use olecar_core::engine::CostMode;
use serde::{Deserialize, Serialize};

/// Learning-rate flag value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RateChoice {
    /// Constant rate in `(0, 1]`.
    Fixed(f64),
    /// Optimal rate for the known horizon.
    Auto,
    /// Optimal rate recomputed at powers of two (cache simulations only).
    AutoStream,
}

impl FromStr for RateChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "auto" => Ok(RateChoice::Auto),
            "auto-stream" => Ok(RateChoice::AutoStream),
            other => {
                let eta: f64 = other
                    .parse()
                    .map_err(|_| format!("learning rate `{other}` is neither a number nor `auto`"))?;
                if eta > 0.0 && eta <= 1.0 {
                    Ok(RateChoice::Fixed(eta))
                } else {
                    Err(format!("learning rate {eta} outside (0, 1]"))
                }
            }
        }
    }
}

impl fmt::Display for RateChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateChoice::Fixed(eta) => write!(f, "{eta}"),
            RateChoice::Auto => f.write_str("auto"),
            RateChoice::AutoStream => f.write_str("auto-stream"),
        }
    }
}

impl From<RateChoice> for String {
    fn from(r: RateChoice) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for RateChoice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Cache policy selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyChoice {
    /// Pure LRU.
    Lru,
    /// Pure LFU.
    Lfu,
    /// LeCaR: fixed rate 0.45, geometric discount.
    Lecar,
    /// OLeCaR.
    Olecar,
}

impl PolicyChoice {
    /// Every policy, in report order.
    pub const ALL: [PolicyChoice; 4] = [PolicyChoice::Lru, PolicyChoice::Lfu, PolicyChoice::Lecar, PolicyChoice::Olecar];

    /// Lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            PolicyChoice::Lru => "lru",
            PolicyChoice::Lfu => "lfu",
            PolicyChoice::Lecar => "lecar",
            PolicyChoice::Olecar => "olecar",
        }
    }

    /// Whether the policy learns (and so has a learning rate).
    pub fn is_learner(self) -> bool {
        matches!(self, PolicyChoice::Lecar | PolicyChoice::Olecar)
    }
}

/// Layout of a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TraceFormat {
    /// One key per non-empty line; `#` lines are comments.
    Lines,
    /// Comma-separated rows, key in a 0-based column.
    Csv {
        /// Key column.
        column: usize,
        /// Skip the first row.
        skip_header: bool,
    },
}

/// Where the request sequence comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceInput {
    /// Trace file.
    File {
        /// Path as given on the command line.
        path: String,
        /// File layout.
        format: TraceFormat,
    },
    /// Generated phase trace, seeded by the run seed.
    Synthetic {
        /// Phase specification, e.g. `zipf:keys=40,len=10000`.
        spec: String,
    },
}

/// `cache-sim` parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheSimConfig {
    /// Request source.
    pub trace: TraceInput,
    /// Cache capacity.
    pub cache_size: usize,
    /// Policies to run.
    pub policies: Vec<PolicyChoice>,
    /// Learning rate for the learning policies; per-policy default if unset.
    pub learning_rate: Option<RateChoice>,
    /// Eviction history size; cache size if unset.
    pub history_size: Option<usize>,
    /// Cost mode for the learning policies; per-policy default if unset.
    pub cost_mode: Option<CostMode>,
    /// Importance weighting for the learning policies; off if unset.
    pub importance_weighting: Option<bool>,
    /// Seed for victim sampling and synthetic traces.
    pub seed: u64,
    /// Emit time series.
    pub series: bool,
}

/// Synthetic environment family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    /// Fixed means.
    Stochastic,
    /// Arms 0 and 1 exchange means partway through.
    Switching,
}

/// `bandit-sim` parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditSimConfig {
    /// Number of arms `K`.
    pub arms: usize,
    /// Number of one-hot experts `N`, recommending arms `0..N`.
    pub experts: usize,
    /// Rounds per replicate.
    pub horizon: u64,
    /// Environment family.
    pub env: EnvKind,
    /// Mean cost per arm; arm 0 at 0.1 and the rest at 0.5 if unset.
    pub means: Option<Vec<f64>>,
    /// First round after the switch (switching only); `T/2 + 1` if unset.
    pub switch_at: Option<u64>,
    /// Largest delay `m`, also the drop threshold.
    pub delay_max: u64,
    /// Learning rate.
    pub learning_rate: RateChoice,
    /// Number of replicates.
    pub seeds: u64,
    /// First replicate seed.
    pub seed_base: u64,
    /// Emit time series.
    pub series: bool,
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    /// `--learning-rate`.
    LearningRate,
}

/// Simulation a sweep varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum SweepBase {
    /// Cache simulation.
    CacheSim(CacheSimConfig),
    /// Bandit experiment.
    BanditSim(BanditSimConfig),
}

/// `sweep` parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Varied parameter.
    pub param: SweepParam,
    /// Values, in row order.
    pub values: Vec<RateChoice>,
    /// Base run.
    pub base: SweepBase,
}

/// Any runnable configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum RunConfig {
    /// `cache-sim`.
    CacheSim(CacheSimConfig),
    /// `bandit-sim`.
    BanditSim(BanditSimConfig),
    /// `sweep`.
    Sweep(SweepConfig),
}
