//! Per-directed-link, per-core spectrum slot occupancy.
//!
//! Every lightpath occupies the same contiguous slot window in the same core
//! on each directed link of its route, followed by `guard_slots` guard slots
//! unless the window ends at the top of the band.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::DirectedLink;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub cores: usize,
    pub slots_per_core: usize,
    pub slot_bandwidth_ghz: f64,
    pub guard_slots: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            cores: 4,
            slots_per_core: 320,
            slot_bandwidth_ghz: 12.5,
            guard_slots: 1,
        }
    }
}

impl SpectrumConfig {
    /// Slots per directed link across all cores.
    pub fn link_capacity(&self) -> usize {
        self.cores * self.slots_per_core
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LightpathId(pub u64);

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("slot {slot} of core {core} on directed link {link} is already occupied")]
    Conflict {
        link: usize,
        core: usize,
        slot: usize,
    },
    #[error("window [{start}, {end}) exceeds {slots} slots or core {core} does not exist")]
    OutOfRange {
        core: usize,
        start: usize,
        end: usize,
        slots: usize,
    },
    #[error("lightpath path is empty")]
    EmptyPath,
    #[error("unknown lightpath {0:?}")]
    UnknownLightpath(LightpathId),
    #[error("spectrum invariant violated: {0}")]
    Invariant(String),
}

/// Bitmap of one core's slots; a set bit is an occupied slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreSlots {
    words: Vec<u64>,
    len: usize,
    occupied: usize,
}

impl CoreSlots {
    fn new(len: usize) -> Self {
        CoreSlots {
            words: vec![0; len.div_ceil(64)],
            len,
            occupied: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_occupied(&self, slot: usize) -> bool {
        self.words[slot / 64] >> (slot % 64) & 1 == 1
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied
    }

    fn set(&mut self, slot: usize, value: bool) {
        let bit = 1u64 << (slot % 64);
        let word = &mut self.words[slot / 64];
        let was = *word & bit != 0;
        if value && !was {
            *word |= bit;
            self.occupied += 1;
        } else if !value && was {
            *word &= !bit;
            self.occupied -= 1;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|s| self.is_occupied(s))
    }
}

/// Index of the first set bit at or after `from`, or `len`.
fn next_set(words: &[u64], from: usize, len: usize) -> usize {
    if from >= len {
        return len;
    }
    let mut w = from / 64;
    let mut bits = words[w] & (!0u64 << (from % 64));
    loop {
        if bits != 0 {
            return (w * 64 + bits.trailing_zeros() as usize).min(len);
        }
        w += 1;
        if w == words.len() {
            return len;
        }
        bits = words[w];
    }
}

/// Index of the first clear bit at or after `from`, or `len`.
fn next_clear(words: &[u64], from: usize, len: usize) -> usize {
    if from >= len {
        return len;
    }
    let mut w = from / 64;
    let mut bits = !words[w] & (!0u64 << (from % 64));
    loop {
        if bits != 0 {
            return (w * 64 + bits.trailing_zeros() as usize).min(len);
        }
        w += 1;
        if w == words.len() {
            return len;
        }
        bits = !words[w];
    }
}

/// Lowest start of a `data`-slot window plus `guard` free slots in the
/// free-slot bitmap `words` (set bit = unusable). A window ending exactly at
/// `len` needs no guard.
fn first_fit_in(words: &[u64], len: usize, data: usize, guard: usize) -> Option<usize> {
    let mut pos = 0;
    while pos < len {
        let start = next_clear(words, pos, len);
        if start == len {
            return None;
        }
        let end = next_set(words, start, len);
        if end == len {
            if start + data + guard <= len || start + data == len {
                return Some(start);
            }
            return (start + data <= len).then(|| len - data);
        }
        if end - start >= data + guard {
            return Some(start);
        }
        pos = end;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSpectrumState {
    cores: Vec<CoreSlots>,
}

impl LinkSpectrumState {
    pub fn new(cfg: &SpectrumConfig) -> Self {
        LinkSpectrumState {
            cores: (0..cfg.cores).map(|_| CoreSlots::new(cfg.slots_per_core)).collect(),
        }
    }

    pub fn core(&self, core: usize) -> &CoreSlots {
        &self.cores[core]
    }

    pub fn cores(&self) -> &[CoreSlots] {
        &self.cores
    }

    pub fn occupied_count_per_core(&self) -> Vec<usize> {
        self.cores.iter().map(CoreSlots::occupied_count).collect()
    }
}

/// Spectrum occupancy ratio: occupied slots over all slots of all cores.
pub fn sor(link_state: &LinkSpectrumState, cfg: &SpectrumConfig) -> f64 {
    traffic_load(link_state) as f64 / cfg.link_capacity() as f64
}

/// Occupied slots (data and guard) summed over cores.
pub fn traffic_load(link_state: &LinkSpectrumState) -> usize {
    link_state.cores.iter().map(CoreSlots::occupied_count).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub lightpath_id: LightpathId,
    pub links: Vec<DirectedLink>,
    pub core: usize,
    pub start_slot: usize,
    pub data_slots: usize,
    pub guard_slots_used: usize,
    pub expiry_time: f64,
}

impl Allocation {
    /// Data plus guard slots held on each link.
    pub fn width(&self) -> usize {
        self.data_slots + self.guard_slots_used
    }
}

/// Occupancy of every directed link plus the ledger of active lightpaths.
#[derive(Debug, Clone)]
pub struct NetworkState {
    cfg: SpectrumConfig,
    links: Vec<LinkSpectrumState>,
    ledger: BTreeMap<LightpathId, Allocation>,
    next_id: u64,
    scratch: Vec<u64>,
}

// The scratch buffer is working memory, not state.
impl PartialEq for NetworkState {
    fn eq(&self, other: &Self) -> bool {
        self.cfg == other.cfg
            && self.links == other.links
            && self.ledger == other.ledger
            && self.next_id == other.next_id
    }
}

impl NetworkState {
    pub fn new(directed_links: usize, cfg: &SpectrumConfig) -> Self {
        NetworkState {
            cfg: cfg.clone(),
            links: (0..directed_links).map(|_| LinkSpectrumState::new(cfg)).collect(),
            ledger: BTreeMap::new(),
            next_id: 0,
            scratch: vec![0; cfg.slots_per_core.div_ceil(64)],
        }
    }

    pub fn config(&self) -> &SpectrumConfig {
        &self.cfg
    }

    pub fn link(&self, link: DirectedLink) -> &LinkSpectrumState {
        &self.links[link.index()]
    }

    pub fn directed_link_count(&self) -> usize {
        self.links.len()
    }

    pub fn sor(&self, link: DirectedLink) -> f64 {
        sor(&self.links[link.index()], &self.cfg)
    }

    pub fn active(&self) -> impl Iterator<Item = &Allocation> {
        self.ledger.values()
    }

    pub fn active_count(&self) -> usize {
        self.ledger.len()
    }

    pub fn allocation(&self, id: LightpathId) -> Option<&Allocation> {
        self.ledger.get(&id)
    }

    pub fn total_occupied(&self) -> usize {
        self.links.iter().map(traffic_load).sum()
    }

    /// Lowest start slot of a free window in `core` on every link of `path`.
    pub fn find_first_fit(
        &mut self,
        path: &[DirectedLink],
        core: usize,
        data_slots: usize,
    ) -> Option<usize> {
        if path.is_empty() || data_slots == 0 || core >= self.cfg.cores {
            return None;
        }
        let len = self.cfg.slots_per_core;
        let mut union = std::mem::take(&mut self.scratch);
        union.iter_mut().for_each(|w| *w = 0);
        for link in path {
            for (u, w) in union.iter_mut().zip(&self.links[link.index()].cores[core].words) {
                *u |= w;
            }
        }
        let found = first_fit_in(&union, len, data_slots, self.cfg.guard_slots);
        self.scratch = union;
        found
    }

    /// First-fit over cores in index order.
    pub fn find_first_fit_any_core(
        &mut self,
        path: &[DirectedLink],
        data_slots: usize,
    ) -> Option<(usize, usize)> {
        (0..self.cfg.cores)
            .find_map(|core| self.find_first_fit(path, core, data_slots).map(|s| (core, s)))
    }

    /// Marks the window (and its guard) occupied on every link of `path`.
    pub fn allocate(
        &mut self,
        path: &[DirectedLink],
        core: usize,
        start_slot: usize,
        data_slots: usize,
        expiry_time: f64,
    ) -> Result<Allocation, SpectrumError> {
        if path.is_empty() {
            return Err(SpectrumError::EmptyPath);
        }
        let slots = self.cfg.slots_per_core;
        let data_end = start_slot + data_slots;
        if core >= self.cfg.cores || data_slots == 0 || data_end > slots {
            return Err(SpectrumError::OutOfRange {
                core,
                start: start_slot,
                end: data_end,
                slots,
            });
        }
        let guard_slots_used = if data_end == slots {
            0
        } else {
            self.cfg.guard_slots.min(slots - data_end)
        };
        let end = data_end + guard_slots_used;
        for link in path {
            let state = &self.links[link.index()].cores[core];
            if let Some(slot) = (start_slot..end).find(|&s| state.is_occupied(s)) {
                return Err(SpectrumError::Conflict {
                    link: link.index(),
                    core,
                    slot,
                });
            }
        }
        for link in path {
            let state = &mut self.links[link.index()].cores[core];
            for s in start_slot..end {
                state.set(s, true);
            }
        }
        let allocation = Allocation {
            lightpath_id: LightpathId(self.next_id),
            links: path.to_vec(),
            core,
            start_slot,
            data_slots,
            guard_slots_used,
            expiry_time,
        };
        self.next_id += 1;
        self.ledger.insert(allocation.lightpath_id, allocation.clone());
        Ok(allocation)
    }

    /// Frees every slot of the lightpath and removes it from the ledger.
    pub fn release(&mut self, id: LightpathId) -> Result<Allocation, SpectrumError> {
        let allocation = self
            .ledger
            .remove(&id)
            .ok_or(SpectrumError::UnknownLightpath(id))?;
        let end = allocation.start_slot + allocation.width();
        for link in &allocation.links {
            let state = &mut self.links[link.index()].cores[allocation.core];
            for s in allocation.start_slot..end {
                state.set(s, false);
            }
        }
        Ok(allocation)
    }

    /// Conservation and no-overlap: rebuilds occupancy from the ledger and
    /// compares it with the live bitmaps and counters.
    pub fn check_invariants(&self) -> Result<(), SpectrumError> {
        let mut owner: Vec<Vec<Vec<Option<LightpathId>>>> = self
            .links
            .iter()
            .map(|_| vec![vec![None; self.cfg.slots_per_core]; self.cfg.cores])
            .collect();
        let mut expected_total = 0;
        for a in self.ledger.values() {
            expected_total += a.width() * a.links.len();
            for link in &a.links {
                for s in a.start_slot..a.start_slot + a.width() {
                    let cell = &mut owner[link.index()][a.core][s];
                    if let Some(other) = cell {
                        return Err(SpectrumError::Invariant(format!(
                            "slot {s} core {} link {} owned by {:?} and {:?}",
                            a.core,
                            link.index(),
                            other,
                            a.lightpath_id
                        )));
                    }
                    *cell = Some(a.lightpath_id);
                }
            }
        }
        for (l, link) in self.links.iter().enumerate() {
            for (c, core) in link.cores.iter().enumerate() {
                let mut count = 0;
                for s in 0..core.len {
                    let occupied = core.is_occupied(s);
                    count += usize::from(occupied);
                    if occupied != owner[l][c][s].is_some() {
                        return Err(SpectrumError::Invariant(format!(
                            "slot {s} core {c} link {l}: bitmap {occupied} disagrees with ledger"
                        )));
                    }
                }
                if count != core.occupied {
                    return Err(SpectrumError::Invariant(format!(
                        "core {c} link {l}: counter {} but {count} bits set",
                        core.occupied
                    )));
                }
            }
        }
        let total = self.total_occupied();
        if total != expected_total {
            return Err(SpectrumError::Invariant(format!(
                "{total} occupied slots but ledger accounts for {expected_total}"
            )));
        }
        Ok(())
    }

    /// Same occupancy bitmaps on every link and core.
    pub fn same_occupancy(&self, other: &NetworkState) -> bool {
        self.links == other.links
    }

    /// One line per directed link and core: `<link>:<core> <0|1 per slot>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (l, link) in self.links.iter().enumerate() {
            for (c, core) in link.cores.iter().enumerate() {
                let _ = write!(out, "{l}:{c} ");
                out.extend(core.iter().map(|b| if b { '1' } else { '0' }));
                out.push('\n');
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_link(cfg: &SpectrumConfig) -> NetworkState {
        NetworkState::new(1, cfg)
    }

    const L0: DirectedLink = DirectedLink(0);

    /// Slot-by-slot scan, independent of the word-level search.
    fn naive_first_fit(state: &NetworkState, path: &[DirectedLink], core: usize, w: usize) -> Option<usize> {
        let cfg = state.config();
        let s_max = cfg.slots_per_core;
        let free = |s: usize| path.iter().all(|l| !state.link(*l).core(core).is_occupied(s));
        (0..s_max).find(|&start| {
            let end = start + w;
            if end > s_max || !(start..end).all(free) {
                return false;
            }
            end == s_max || (end + cfg.guard_slots <= s_max && (end..end + cfg.guard_slots).all(free))
        })
    }

    #[test]
    fn sor_and_load_extremes() {
        let cfg = SpectrumConfig::default();
        let mut st = one_link(&cfg);
        assert_eq!(st.sor(L0), 0.0);
        assert_eq!(traffic_load(st.link(L0)), 0);
        for c in 0..cfg.cores {
            st.allocate(&[L0], c, 0, cfg.slots_per_core, 1.0).unwrap();
        }
        assert_eq!(st.sor(L0), 1.0);
        assert_eq!(traffic_load(st.link(L0)), 1280);
    }

    #[test]
    fn sor_counts_across_cores() {
        let cfg = SpectrumConfig { guard_slots: 0, ..Default::default() };
        let mut st = one_link(&cfg);
        for c in 0..4 {
            st.allocate(&[L0], c, 0, 40, 1.0).unwrap();
        }
        assert_eq!(traffic_load(st.link(L0)), 160);
        assert_eq!(st.sor(L0), 0.125);
    }

    #[test]
    fn guard_counts_toward_load() {
        let cfg = SpectrumConfig::default();
        let mut st = one_link(&cfg);
        let a = st.allocate(&[L0], 0, 0, 3, 1.0).unwrap();
        assert_eq!(a.guard_slots_used, 1);
        assert_eq!(traffic_load(st.link(L0)), 4);
    }

    #[test]
    fn first_fit_examples() {
        let cfg = SpectrumConfig::default();
        let mut st = one_link(&cfg);
        assert_eq!(st.find_first_fit(&[L0], 0, 3), Some(0));
        // Occupy 0..=3 exactly (data 3 + guard 1).
        st.allocate(&[L0], 0, 0, 3, 1.0).unwrap();
        assert_eq!(st.find_first_fit(&[L0], 0, 2), Some(4));

        let mut st = one_link(&cfg);
        st.allocate(&[L0], 0, 0, 316, 1.0).unwrap(); // 0..=316 with guard
        assert_eq!(st.find_first_fit(&[L0], 0, 3), Some(317));
        let a = st.allocate(&[L0], 0, 317, 3, 1.0).unwrap();
        assert_eq!(a.guard_slots_used, 0);
        assert_eq!(st.find_first_fit(&[L0], 0, 1), None);
    }

    #[test]
    fn back_to_back_allocations_share_one_guard() {
        let cfg = SpectrumConfig::default();
        let mut st = one_link(&cfg);
        let s1 = st.find_first_fit(&[L0], 0, 2).unwrap();
        st.allocate(&[L0], 0, s1, 2, 1.0).unwrap();
        let s2 = st.find_first_fit(&[L0], 0, 2).unwrap();
        assert_eq!((s1, s2), (0, 3));
    }

    #[test]
    fn release_is_inverse_and_gap_is_reused() {
        let cfg = SpectrumConfig::default();
        let mut st = one_link(&cfg);
        let before = st.clone();
        let a = st.allocate(&[L0], 0, 0, 4, 1.0).unwrap();
        assert_eq!(st.sor(L0), 5.0 / 1280.0);
        st.release(a.lightpath_id).unwrap();
        assert!(st.same_occupancy(&before));

        let a = st.allocate(&[L0], 0, 0, 4, 1.0).unwrap();
        let s = st.find_first_fit(&[L0], 0, 4).unwrap();
        st.allocate(&[L0], 0, s, 4, 1.0).unwrap();
        st.release(a.lightpath_id).unwrap();
        assert_eq!(st.find_first_fit(&[L0], 0, 4), Some(a.start_slot));
    }

    #[test]
    fn release_unknown_and_conflicts() {
        let cfg = SpectrumConfig::default();
        let mut st = one_link(&cfg);
        assert_eq!(
            st.release(LightpathId(7)),
            Err(SpectrumError::UnknownLightpath(LightpathId(7)))
        );
        st.allocate(&[L0], 1, 10, 2, 1.0).unwrap();
        assert!(matches!(
            st.allocate(&[L0], 1, 9, 2, 1.0),
            Err(SpectrumError::Conflict { slot: 10, .. })
        ));
        assert!(matches!(
            st.allocate(&[L0], 4, 0, 1, 1.0),
            Err(SpectrumError::OutOfRange { .. })
        ));
        st.check_invariants().unwrap();
    }

    #[test]
    fn continuity_across_links() {
        let cfg = SpectrumConfig::default();
        let mut st = NetworkState::new(4, &cfg);
        let path = [DirectedLink(0), DirectedLink(2)];
        st.allocate(&[DirectedLink(2)], 0, 0, 5, 1.0).unwrap();
        assert_eq!(st.find_first_fit(&path, 0, 2), Some(6));
        assert_eq!(st.find_first_fit(&path, 1, 2), Some(0));
        // The reverse direction is independent.
        assert_eq!(st.find_first_fit(&[DirectedLink(3)], 0, 2), Some(0));
    }

    #[test]
    fn dump_format() {
        let cfg = SpectrumConfig { cores: 1, slots_per_core: 8, slot_bandwidth_ghz: 12.5, guard_slots: 1 };
        let mut st = one_link(&cfg);
        st.allocate(&[L0], 0, 2, 2, 1.0).unwrap();
        assert_eq!(st.dump(), "0:0 00111000\n");
    }

    proptest::proptest! {
        #[test]
        fn first_fit_matches_naive_scan(
            ops in proptest::collection::vec((0usize..3, 0usize..2, 0usize..70, 1usize..9), 0..40),
            guard in 0usize..3,
            query in (1usize..12, 0usize..2),
        ) {
            let cfg = SpectrumConfig { cores: 2, slots_per_core: 70, slot_bandwidth_ghz: 12.5, guard_slots: guard };
            let mut st = NetworkState::new(3, &cfg);
            for (link, core, start, w) in ops {
                let _ = st.allocate(&[DirectedLink(link)], core, start, w, 1.0);
            }
            let path = [DirectedLink(0), DirectedLink(2)];
            let (w, core) = query;
            let expected = naive_first_fit(&st, &path, core, w);
            proptest::prop_assert_eq!(st.find_first_fit(&path, core, w), expected);
            st.check_invariants().unwrap();
        }
    }
}
