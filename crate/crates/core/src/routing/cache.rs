use std::collections::HashMap;
use std::hash::Hash;
use std::ops::Add;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ExclusionSet, Path};
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PathCacheKey {
    pub s: NodeId,
    pub d: NodeId,
    pub excluded: ExclusionSet,
}

impl PathCacheKey {
    pub fn new(s: NodeId, d: NodeId, excluded: ExclusionSet) -> Self {
        PathCacheKey { s, d, excluded }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
}

impl CacheStats {
    pub fn lookups(&self) -> u64 {
        self.hits + self.misses
    }

    pub fn hit_rate(&self) -> f64 {
        if self.lookups() == 0 {
            0.0
        } else {
            self.hits as f64 / self.lookups() as f64
        }
    }
}

impl Add for CacheStats {
    type Output = CacheStats;

    fn add(self, rhs: CacheStats) -> CacheStats {
        CacheStats {
            hits: self.hits + rhs.hits,
            misses: self.misses + rhs.misses,
        }
    }
}

/// Memoization table with hit/miss counters. A disabled memo computes on
/// every lookup and counts each one as a miss.
#[derive(Debug, Clone)]
pub struct Memo<K, V> {
    map: HashMap<K, V>,
    enabled: bool,
    stats: CacheStats,
}

impl<K: Eq + Hash, V: Clone> Memo<K, V> {
    pub fn new(enabled: bool) -> Self {
        Memo {
            map: HashMap::new(),
            enabled,
            stats: CacheStats::default(),
        }
    }

    pub fn lookup_or_compute(&mut self, key: K, compute: impl FnOnce() -> V) -> V {
        if !self.enabled {
            self.stats.misses += 1;
            return compute();
        }
        if let Some(v) = self.map.get(&key) {
            self.stats.hits += 1;
            return v.clone();
        }
        self.stats.misses += 1;
        let v = compute();
        self.map.insert(key, v.clone());
        v
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn reset_stats(&mut self) {
        self.stats = CacheStats::default();
    }
}

/// Shortest-path results keyed by `(s, d, excluded links)`. Absent paths
/// are cached too.
pub type PathCache = Memo<PathCacheKey, Option<Arc<Path>>>;
