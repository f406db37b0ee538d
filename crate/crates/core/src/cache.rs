//! Cache state, the LRU and LFU advisors, and the eviction history.
//!
//! Resident keys live in fixed frames (slots) `0..capacity`. An action in the
//! bandit sense is a slot: expert advice is one-hot over slots, and a newly
//! inserted key takes over the slot of the victim it replaces.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Outcome of looking a key up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    /// Key was resident; recency and frequency were refreshed.
    Hit,
    /// Key was absent; nothing changed.
    Miss,
}

/// Per-key bookkeeping for a resident key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry<K> {
    /// The key.
    pub key: K,
    /// Logical access clock value of the last access; strictly increasing.
    pub recency: u64,
    /// Accesses since the key was (re)inserted.
    pub frequency: u64,
    /// Request round of the last access.
    pub last_round: u64,
}

/// A fixed-capacity cache with recency and frequency indices.
#[derive(Debug, Clone)]
pub struct CacheState<K> {
    capacity: usize,
    slots: Vec<Entry<K>>,
    index: BTreeMap<K, usize>,
    by_recency: BTreeMap<u64, usize>,
    // (frequency, recency, slot): the first element is the LFU victim with
    // least-recent tie-break.
    by_frequency: BTreeSet<(u64, u64, usize)>,
    clock: u64,
}

impl<K: Ord + Clone> CacheState<K> {
    /// Empty cache holding at most `capacity` keys.
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("cache_size", "must be at least 1"));
        }
        Ok(CacheState {
            capacity,
            slots: Vec::with_capacity(capacity),
            index: BTreeMap::new(),
            by_recency: BTreeMap::new(),
            by_frequency: BTreeSet::new(),
            clock: 0,
        })
    }

    /// Maximum number of resident keys.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of resident keys.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    /// True when nothing is resident.
    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// True when an insertion requires an eviction.
    pub fn is_full(&self) -> bool {
        self.slots.len() == self.capacity
    }

    /// Whether `key` is resident.
    pub fn contains(&self, key: &K) -> bool {
        self.index.contains_key(key)
    }

    /// Slot holding `key`.
    pub fn slot_of(&self, key: &K) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Entry stored in `slot`.
    pub fn entry(&self, slot: usize) -> Option<&Entry<K>> {
        self.slots.get(slot)
    }

    /// Key stored in `slot`.
    pub fn key_at(&self, slot: usize) -> Option<&K> {
        self.slots.get(slot).map(|e| &e.key)
    }

    /// Resident entries in slot order.
    pub fn entries(&self) -> &[Entry<K>] {
        &self.slots
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Look `key` up. A hit refreshes recency and bumps the frequency; a miss
    /// leaves the cache untouched.
    pub fn access(&mut self, key: &K, round: u64) -> Access {
        let Some(&slot) = self.index.get(key) else {
            return Access::Miss;
        };
        let now = self.tick();
        let entry = &mut self.slots[slot];
        self.by_recency.remove(&entry.recency);
        self.by_frequency.remove(&(entry.frequency, entry.recency, slot));
        entry.recency = now;
        entry.frequency += 1;
        entry.last_round = round;
        self.by_recency.insert(now, slot);
        self.by_frequency.insert((entry.frequency, now, slot));
        Access::Hit
    }

    /// Insert a non-resident key. When the cache is full, `victim` must be
    /// resident and is evicted; the new key takes its slot. When the cache is
    /// not full, `victim` is ignored.
    ///
    /// Returns the slot used and the evicted key, if any.
    pub fn insert_with_eviction(
        &mut self,
        key: K,
        victim: Option<&K>,
        round: u64,
    ) -> Result<(usize, Option<K>)> {
        if self.index.contains_key(&key) {
            return Err(Error::AlreadyResident);
        }
        if !self.is_full() {
            let slot = self.slots.len();
            let now = self.tick();
            self.index.insert(key.clone(), slot);
            self.slots.push(Entry {
                key,
                recency: now,
                frequency: 1,
                last_round: round,
            });
            self.by_recency.insert(now, slot);
            self.by_frequency.insert((1, now, slot));
            return Ok((slot, None));
        }
        let victim = victim.ok_or(Error::MissingVictim)?;
        let slot = *self.index.get(victim).ok_or(Error::VictimNotResident)?;
        let now = self.tick();
        let old = core::mem::replace(
            &mut self.slots[slot],
            Entry {
                key: key.clone(),
                recency: now,
                frequency: 1,
                last_round: round,
            },
        );
        self.index.remove(&old.key);
        self.by_recency.remove(&old.recency);
        self.by_frequency.remove(&(old.frequency, old.recency, slot));
        self.index.insert(key, slot);
        self.by_recency.insert(now, slot);
        self.by_frequency.insert((1, now, slot));
        Ok((slot, Some(old.key)))
    }

    /// Slot of the least recently used key. Only meaningful when full.
    pub fn lru_advise(&self) -> Result<usize> {
        if !self.is_full() {
            return Err(Error::CacheNotFull);
        }
        Ok(*self.by_recency.values().next().expect("full cache has entries"))
    }

    /// Slot of the least frequently used key, least recent among ties.
    pub fn lfu_advise(&self) -> Result<usize> {
        if !self.is_full() {
            return Err(Error::CacheNotFull);
        }
        Ok(self.by_frequency.iter().next().expect("full cache has entries").2)
    }

    /// Victim slot advised by `policy`.
    pub fn advise(&self, policy: Policy) -> Result<usize> {
        match policy {
            Policy::Lru => self.lru_advise(),
            Policy::Lfu => self.lfu_advise(),
        }
    }
}

/// The two expert replacement policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Policy {
    /// Least recently used.
    Lru,
    /// Least frequently used, least recent among ties.
    Lfu,
}

impl Policy {
    /// Expert order used by the learning engine.
    pub const EXPERTS: [Policy; 2] = [Policy::Lru, Policy::Lfu];

    /// Lower-case name.
    pub fn name(self) -> &'static str {
        match self {
            Policy::Lru => "lru",
            Policy::Lfu => "lfu",
        }
    }
}

/// One remembered eviction.
#[derive(Debug, Clone, PartialEq)]
pub struct EvictionRecord<K> {
    /// Evicted key.
    pub key: K,
    /// Round in which the eviction happened. Diagnostic only.
    pub round_evicted: u64,
    /// Probability each expert placed on the evicted slot at eviction time.
    pub expert_match: Vec<f64>,
    /// Probability with which the victim slot was chosen.
    pub acting_prob: f64,
    /// Slot the victim occupied.
    pub slot: usize,
}

/// Bounded FIFO of evictions, newest first, with at most one record per key.
///
/// The 1-based position of a key from the newest end stands in for the
/// feedback delay.
#[derive(Debug, Clone)]
pub struct EvictionHistory<K> {
    capacity: usize,
    records: VecDeque<EvictionRecord<K>>,
}

impl<K: PartialEq> EvictionHistory<K> {
    /// Empty history holding at most `capacity` records.
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("history_size", "must be at least 1"));
        }
        Ok(EvictionHistory {
            capacity,
            records: VecDeque::with_capacity(capacity),
        })
    }

    /// Maximum number of records.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Current number of records.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// True when empty.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records, newest first.
    pub fn iter(&self) -> impl Iterator<Item = &EvictionRecord<K>> {
        self.records.iter()
    }

    /// Push a record to the front, replacing any older record for the same key
    /// and dropping the oldest record when over capacity.
    pub fn record(&mut self, rec: EvictionRecord<K>) {
        if let Some(pos) = self.records.iter().position(|r| r.key == rec.key) {
            self.records.remove(pos);
        }
        self.records.push_front(rec);
        self.records.truncate(self.capacity);
    }

    /// Delay (1-based position, newest = 1) and record for `key`.
    pub fn query(&self, key: &K) -> Option<(u64, &EvictionRecord<K>)> {
        self.records
            .iter()
            .position(|r| &r.key == key)
            .map(|pos| (pos as u64 + 1, &self.records[pos]))
    }

    /// Like [`query`](Self::query) but removes the record.
    pub fn take(&mut self, key: &K) -> Option<(u64, EvictionRecord<K>)> {
        let pos = self.records.iter().position(|r| &r.key == key)?;
        let rec = self.records.remove(pos)?;
        Some((pos as u64 + 1, rec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn filled(keys: &[&'static str], cap: usize) -> CacheState<&'static str> {
        let mut c = CacheState::new(cap).unwrap();
        for (r, k) in keys.iter().enumerate() {
            if c.access(k, r as u64) == Access::Miss {
                c.insert_with_eviction(*k, None, r as u64).unwrap();
            }
        }
        c
    }

    #[test]
    fn access_examples() {
        let mut c = filled(&["A", "B"], 2);
        assert_eq!(c.access(&"A", 3), Access::Hit);
        assert_eq!(c.key_at(c.lru_advise().unwrap()), Some(&"B"));
        assert_eq!(c.entry(c.slot_of(&"A").unwrap()).unwrap().frequency, 2);

        let before: Vec<_> = c.entries().to_vec();
        assert_eq!(c.access(&"C", 4), Access::Miss);
        assert_eq!(c.entries(), &before[..]);

        let mut empty: CacheState<&str> = CacheState::new(2).unwrap();
        assert_eq!(empty.access(&"A", 0), Access::Miss);
    }

    #[test]
    fn insert_examples() {
        let mut c = filled(&["A", "B"], 2);
        let (slot, evicted) = c.insert_with_eviction("C", Some(&"B"), 3).unwrap();
        assert_eq!(evicted, Some("B"));
        assert_eq!(slot, 1);
        assert!(c.contains(&"A") && c.contains(&"C") && !c.contains(&"B"));

        let mut c = filled(&["A"], 2);
        let (_, evicted) = c.insert_with_eviction("B", None, 1).unwrap();
        assert_eq!(evicted, None);
        assert_eq!(c.len(), 2);

        let mut c = filled(&["A", "B"], 2);
        assert_eq!(
            c.insert_with_eviction("C", Some(&"Z"), 3),
            Err(Error::VictimNotResident)
        );
        assert_eq!(c.insert_with_eviction("C", None, 3), Err(Error::MissingVictim));
        assert_eq!(c.insert_with_eviction("A", Some(&"B"), 3), Err(Error::AlreadyResident));
        assert!(CacheState::<u32>::new(0).is_err());
    }

    #[test]
    fn lru_examples() {
        let c = filled(&["A", "B", "A"], 2);
        assert_eq!(c.key_at(c.lru_advise().unwrap()), Some(&"B"));
        let c = filled(&["A", "B"], 2);
        assert_eq!(c.key_at(c.lru_advise().unwrap()), Some(&"A"));
        let c = filled(&["A"], 2);
        assert_eq!(c.lru_advise(), Err(Error::CacheNotFull));
    }

    #[test]
    fn lfu_examples() {
        let c = filled(&["A", "A", "B"], 2);
        assert_eq!(c.key_at(c.lfu_advise().unwrap()), Some(&"B"));
        let c = filled(&["A", "B"], 2);
        assert_eq!(c.key_at(c.lfu_advise().unwrap()), Some(&"A"));
        let c = filled(&["A"], 2);
        assert_eq!(c.lfu_advise(), Err(Error::CacheNotFull));
    }

    #[test]
    fn frequency_resets_on_reinsertion() {
        let mut c = filled(&["A", "A", "A", "B"], 2);
        c.insert_with_eviction("C", Some(&"A"), 5).unwrap();
        c.insert_with_eviction("A", Some(&"B"), 6).unwrap();
        assert_eq!(c.entry(c.slot_of(&"A").unwrap()).unwrap().frequency, 1);
    }

    fn rec(key: &'static str) -> EvictionRecord<&'static str> {
        EvictionRecord {
            key,
            round_evicted: 0,
            expert_match: vec![1.0, 0.0],
            acting_prob: 0.5,
            slot: 0,
        }
    }

    #[test]
    fn history_examples() {
        let mut h = EvictionHistory::new(2).unwrap();
        h.record(rec("A"));
        h.record(rec("B"));
        h.record(rec("C"));
        let keys: Vec<_> = h.iter().map(|r| r.key).collect();
        assert_eq!(keys, vec!["C", "B"]);

        let mut h = EvictionHistory::new(4).unwrap();
        h.record(rec("A"));
        h.record(rec("B"));
        h.record(rec("A"));
        let keys: Vec<_> = h.iter().map(|r| r.key).collect();
        assert_eq!(keys, vec!["A", "B"]);

        let mut h = EvictionHistory::new(4).unwrap();
        h.record(rec("A"));
        assert_eq!(h.len(), 1);
        assert!(EvictionHistory::<u8>::new(0).is_err());
    }

    #[test]
    fn history_query_positions() {
        let mut h = EvictionHistory::new(5).unwrap();
        h.record(rec("A"));
        h.record(rec("B"));
        h.record(rec("C"));
        assert_eq!(h.query(&"A").map(|(d, _)| d), Some(3));
        assert_eq!(h.query(&"C").map(|(d, _)| d), Some(1));
        assert!(h.query(&"D").is_none());
        let (d, r) = h.take(&"B").unwrap();
        assert_eq!((d, r.key), (2, "B"));
        assert_eq!(h.query(&"A").map(|(d, _)| d), Some(2));
    }

    proptest! {
        #[test]
        fn residency_and_history_bounds(
            trace in proptest::collection::vec(0u8..12, 1..300),
            cap in 1usize..6,
            hcap in 1usize..6,
            pick in proptest::collection::vec(any::<bool>(), 300),
        ) {
            let mut c = CacheState::new(cap).unwrap();
            let mut h = EvictionHistory::new(hcap).unwrap();
            for (r, &k) in trace.iter().enumerate() {
                if c.access(&k, r as u64) == Access::Miss {
                    let victim = if c.is_full() {
                        let slot = if pick[r] { c.lru_advise().unwrap() } else { c.lfu_advise().unwrap() };
                        Some(*c.key_at(slot).unwrap())
                    } else {
                        None
                    };
                    let (_, evicted) = c.insert_with_eviction(k, victim.as_ref(), r as u64).unwrap();
                    if let Some(e) = evicted {
                        h.record(EvictionRecord { key: e, round_evicted: r as u64, expert_match: vec![1.0], acting_prob: 1.0, slot: 0 });
                        let (d, stored) = h.query(&e).unwrap();
                        prop_assert_eq!(d, 1);
                        prop_assert_eq!(&stored.expert_match, &vec![1.0]);
                    }
                }
                prop_assert!(c.len() <= cap);
                prop_assert!(h.len() <= hcap);
                if c.is_full() {
                    prop_assert!(c.lru_advise().unwrap() < cap);
                    prop_assert!(c.lfu_advise().unwrap() < cap);
                }
                for rec in h.iter() {
                    let (d, _) = h.query(&rec.key).unwrap();
                    prop_assert!(d >= 1 && d as usize <= hcap);
                }
            }
        }
    }
}
