//! Expert-advice bandits with delayed feedback and decaying costs, and the
//! OLeCaR cache replacement engine built on top of them.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, reports and
//! the command line live in the `olecar` companion crate.
//!
//! Layout:
//!
//! - [`bandit`]: action mixing, sampling, decayed cost estimation, exponential
//!   weight updates, learning-rate and regret-bound formulas.
//! - [`cache`]: cache state, LRU/LFU advisors and the bounded eviction history.
//! - [`engine`]: the per-request OLeCaR/LeCaR loop.
//! - [`metrics`]: per-round cost series and regret against the best expert.
//! - [`harness`]: synthetic environments and traces, best-expert oracles and
//!   the replicated experiment runner.
#![no_std]
#![deny(missing_docs)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bandit;
pub mod cache;
pub mod engine;
mod error;
pub mod harness;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};
