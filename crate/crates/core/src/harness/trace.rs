//! Request traces and the synthetic phase workload generator.
//!
//! A phase spec is a `;`-separated list of segments, each `kind:key=value,...`:
//!
//! - `scan:keys=N,len=L[,set=S]`: looping scan `S0, S1, .., S(N-1), S0, ..`.
//! - `zipf:keys=N,len=L[,skew=A][,set=S]`: independent draws over `N` keys with
//!   probability proportional to `1 / rank^A` (default `A = 1`).
//! - `mix:hot=H,scan=N,len=L,share=F[,skew=A][,set=S]`: each request is the
//!   next key of a looping scan over `N` keys with probability `F`, otherwise a
//!   Zipf draw over `H` hot keys.
//! - `repeat:times=R`: repeat everything listed so far `R` times.
//!
//! Keys are named `<set><index>` (scan keys of a `mix` get an extra `s`).
//! Default sets are `s` for scans and `z` for Zipf draws, so phases share keys
//! unless given distinct sets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::DetRng;

/// Where a trace came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TraceSource {
    /// Read from a file.
    File,
    /// Generated.
    Synthetic,
}

/// A non-empty request sequence of opaque keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    keys: Vec<String>,
    source: TraceSource,
}

impl Trace {
    /// Wrap a key sequence; fails when empty.
    pub fn new(keys: Vec<String>, source: TraceSource) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::EmptyTrace);
        }
        Ok(Trace { keys, source })
    }

    /// Keys in request order.
    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    /// Origin.
    pub fn source(&self) -> TraceSource {
        self.source
    }

    /// Number of requests.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    /// Always false.
    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Map keys to dense ids in order of first appearance.
    pub fn intern(&self) -> Vec<u32> {
        let mut ids: BTreeMap<&str, u32> = BTreeMap::new();
        self.keys
            .iter()
            .map(|k| {
                let next = ids.len() as u32;
                *ids.entry(k.as_str()).or_insert(next)
            })
            .collect()
    }

    /// Number of distinct keys.
    pub fn distinct(&self) -> usize {
        self.intern().into_iter().max().map_or(0, |m| m as usize + 1)
    }
}

/// One workload segment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    /// Looping scan.
    Scan {
        /// Working-set size.
        keys: usize,
        /// Requests.
        len: usize,
        /// Key prefix.
        set: String,
    },
    /// Zipf-like draws over a hot set.
    Zipf {
        /// Hot-set size.
        keys: usize,
        /// Requests.
        len: usize,
        /// Exponent.
        skew: f64,
        /// Key prefix.
        set: String,
    },
    /// Hot-set draws interleaved with a looping scan.
    Mix {
        /// Hot-set size.
        hot: usize,
        /// Scan working-set size.
        scan: usize,
        /// Requests.
        len: usize,
        /// Probability that a request belongs to the scan.
        share: f64,
        /// Zipf exponent of the hot set.
        skew: f64,
        /// Key prefix.
        set: String,
    },
}

/// Sequence of phases.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseSpec {
    /// Phases in order.
    pub phases: Vec<Phase>,
}

impl PhaseSpec {
    /// Total number of requests.
    pub fn len(&self) -> usize {
        self.phases
            .iter()
            .map(|p| match p {
                Phase::Scan { len, .. } | Phase::Zipf { len, .. } | Phase::Mix { len, .. } => *len,
            })
            .sum()
    }

    /// True when there are no requests.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn parse_params(body: &str) -> Result<BTreeMap<&str, &str>> {
    let mut out = BTreeMap::new();
    for pair in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got `{pair}`")))?;
        out.insert(k.trim(), v.trim());
    }
    Ok(out)
}

fn take<T: FromStr>(params: &mut BTreeMap<&str, &str>, key: &str, kind: &str) -> Result<Option<T>> {
    match params.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidSpec(format!("{kind}: bad value `{v}` for `{key}`"))),
    }
}

fn need<T: FromStr>(params: &mut BTreeMap<&str, &str>, key: &str, kind: &str) -> Result<T> {
    take(params, key, kind)?.ok_or_else(|| Error::InvalidSpec(format!("{kind}: missing `{key}`")))
}

impl FromStr for PhaseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut phases = Vec::new();
        for segment in s.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (kind, body) = segment.split_once(':').unwrap_or((segment, ""));
            let kind = kind.trim();
            let mut p = parse_params(body)?;
            match kind {
                "scan" => phases.push(Phase::Scan {
                    keys: need(&mut p, "keys", kind)?,
                    len: need(&mut p, "len", kind)?,
                    set: take(&mut p, "set", kind)?.unwrap_or_else(|| "s".to_string()),
                }),
                "zipf" => phases.push(Phase::Zipf {
                    keys: need(&mut p, "keys", kind)?,
                    len: need(&mut p, "len", kind)?,
                    skew: take(&mut p, "skew", kind)?.unwrap_or(1.0),
                    set: take(&mut p, "set", kind)?.unwrap_or_else(|| "z".to_string()),
                }),
                "mix" => phases.push(Phase::Mix {
                    hot: need(&mut p, "hot", kind)?,
                    scan: need(&mut p, "scan", kind)?,
                    len: need(&mut p, "len", kind)?,
                    share: need(&mut p, "share", kind)?,
                    skew: take(&mut p, "skew", kind)?.unwrap_or(1.0),
                    set: take(&mut p, "set", kind)?.unwrap_or_else(|| "m".to_string()),
                }),
                "repeat" => {
                    let times: usize = need(&mut p, "times", kind)?;
                    if times == 0 {
                        return Err(Error::InvalidSpec("repeat: times must be at least 1".into()));
                    }
                    let once = phases.clone();
                    for _ in 1..times {
                        phases.extend(once.iter().cloned());
                    }
                }
                other => return Err(Error::InvalidSpec(format!("unknown phase kind `{other}`"))),
            }
            if let Some(extra) = p.keys().next() {
                return Err(Error::InvalidSpec(format!("{kind}: unknown parameter `{extra}`")));
            }
        }
        let spec = PhaseSpec { phases };
        spec.validate()?;
        Ok(spec)
    }
}

impl PhaseSpec {
    fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::InvalidSpec("no phases".into()));
        }
        for p in &self.phases {
            let ok = match p {
                Phase::Scan { keys, .. } => *keys > 0,
                Phase::Zipf { keys, skew, .. } => *keys > 0 && skew.is_finite() && *skew >= 0.0,
                Phase::Mix {
                    hot,
                    scan,
                    share,
                    skew,
                    ..
                } => {
                    *hot > 0
                        && *scan > 0
                        && (0.0..=1.0).contains(share)
                        && skew.is_finite()
                        && *skew >= 0.0
                }
            };
            if !ok {
                return Err(Error::InvalidSpec(format!("bad phase parameters: {p:?}")));
            }
        }
        if self.is_empty() {
            return Err(Error::InvalidSpec("phases contain no requests".into()));
        }
        Ok(())
    }
}

struct ZipfTable {
    cdf: Vec<f64>,
}

impl ZipfTable {
    fn new(keys: usize, skew: f64) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (1..=keys)
            .map(|r| {
                acc += libm::pow(r as f64, -skew);
                acc
            })
            .collect();
        for c in &mut cdf {
            *c /= acc;
        }
        ZipfTable { cdf }
    }

    fn draw(&self, rng: &mut DetRng) -> usize {
        let u = rng.next_f64();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Generate the trace described by `spec`.
pub fn gen_phase_trace(spec: &PhaseSpec, seed: u64) -> Result<Trace> {
    spec.validate()?;
    let mut rng = DetRng::new(seed);
    let mut keys = Vec::with_capacity(spec.len());
    for phase in &spec.phases {
        match phase {
            Phase::Scan { keys: n, len, set } => {
                keys.extend((0..*len).map(|i| format!("{set}{}", i % n)));
            }
            Phase::Zipf {
                keys: n,
                len,
                skew,
                set,
            } => {
                let table = ZipfTable::new(*n, *skew);
                for _ in 0..*len {
                    keys.push(format!("{set}{}", table.draw(&mut rng)));
                }
            }
            Phase::Mix {
                hot,
                scan,
                len,
                share,
                skew,
                set,
            } => {
                let table = ZipfTable::new(*hot, *skew);
                let mut cursor = 0usize;
                for _ in 0..*len {
                    if rng.next_f64() < *share {
                        keys.push(format!("{set}s{}", cursor % scan));
                        cursor += 1;
                    } else {
                        keys.push(format!("{set}{}", table.draw(&mut rng)));
                    }
                }
            }
        }
    }
    Trace::new(keys, TraceSource::Synthetic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn parse_and_generate() {
        let spec: PhaseSpec = "scan:keys=3,len=7; zipf:keys=4,len=5,skew=0.5,set=h".parse().unwrap();
        assert_eq!(spec.len(), 12);
        let t = gen_phase_trace(&spec, 1).unwrap();
        assert_eq!(&t.keys()[..7], &["s0", "s1", "s2", "s0", "s1", "s2", "s0"]);
        assert!(t.keys()[7..].iter().all(|k| k.starts_with('h')));
        assert_eq!(t.source(), TraceSource::Synthetic);
    }

    #[test]
    fn repeat_duplicates_prefix() {
        let spec: PhaseSpec = "scan:keys=2,len=2;zipf:keys=1,len=1;repeat:times=3".parse().unwrap();
        assert_eq!(spec.phases.len(), 6);
        let t = gen_phase_trace(&spec, 0).unwrap();
        assert_eq!(t.keys(), &["s0", "s1", "z0", "s0", "s1", "z0", "s0", "s1", "z0"]);
    }

    #[test]
    fn same_seed_same_trace() {
        let spec: PhaseSpec = "mix:hot=10,scan=50,len=2000,share=0.3".parse().unwrap();
        assert_eq!(gen_phase_trace(&spec, 4).unwrap(), gen_phase_trace(&spec, 4).unwrap());
        assert_ne!(gen_phase_trace(&spec, 4).unwrap(), gen_phase_trace(&spec, 5).unwrap());
    }

    #[test]
    fn zipf_prefers_low_ranks() {
        let spec: PhaseSpec = "zipf:keys=20,len=20000,skew=1.2".parse().unwrap();
        let t = gen_phase_trace(&spec, 9).unwrap();
        let top = t.keys().iter().filter(|k| *k == "z0").count();
        let tail = t.keys().iter().filter(|k| *k == "z19").count();
        assert!(top > 10 * tail);
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "scan:keys=3",
            "scan:keys=0,len=3",
            "zipf:keys=3,len=3,skew=x",
            "blah:len=3",
            "scan:keys=3,len=3,extra=1",
            "mix:hot=3,scan=3,len=3,share=1.5",
            "scan:keys=3,len=0",
            "repeat:times=0",
        ] {
            assert!(bad.parse::<PhaseSpec>().is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn intern_by_first_appearance() {
        let t = Trace::new(
            vec!["b".into(), "a".into(), "b".into(), "c".into()],
            TraceSource::File,
        )
        .unwrap();
        assert_eq!(t.intern(), vec![0, 1, 0, 2]);
        assert_eq!(t.distinct(), 3);
        assert_eq!(Trace::new(vec![], TraceSource::File), Err(Error::EmptyTrace));
    }
}
