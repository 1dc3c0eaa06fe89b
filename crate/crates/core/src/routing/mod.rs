//! Path computation: shortest paths with link exclusions, K-shortest and
//! link-disjoint candidates, congestion-aware alternatives, and the
//! exclusion-keyed path cache.
//!
//! All searches minimize a per-link weight (the physical length unless
//! stated otherwise) and break ties between equal-weight paths by the
//! lexicographically smallest node sequence, so every result is
//! deterministic.

mod cache;
mod congestion;
mod dijkstra;
mod disjoint;
mod yen;

use std::cmp::Ordering;
use std::sync::Arc;

use serde::Serialize;

use crate::topology::{nearly_equal, DirectedLink, LinkId, NodeId, Topology};

pub use cache::{CacheStats, Memo, PathCache, PathCacheKey};
pub use congestion::{ca_alternative_path, ca_alternative_path_with, congested_link};
pub use dijkstra::{shortest_path, shortest_path_by};
pub use disjoint::{ca_disjoint_path, ca_disjoint_path_with, k_disjoint_paths, k_disjoint_paths_with};
pub use yen::yen_ksp;

/// A loop-free route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    nodes: Vec<NodeId>,
    links: Vec<LinkId>,
    directed: Vec<DirectedLink>,
    length_km: f64,
}

impl Path {
    /// Builds a path from a node sequence. Returns `None` if two consecutive
    /// nodes are not adjacent or a node repeats.
    pub fn from_nodes(t: &Topology, nodes: Vec<NodeId>) -> Option<Path> {
        if nodes.len() < 2 {
            return None;
        }
        let mut seen = vec![false; t.node_count()];
        for n in &nodes {
            if n.0 >= t.node_count() || std::mem::replace(&mut seen[n.0], true) {
                return None;
            }
        }
        let mut links = Vec::with_capacity(nodes.len() - 1);
        let mut directed = Vec::with_capacity(nodes.len() - 1);
        let mut length_km = 0.0;
        for pair in nodes.windows(2) {
            let id = t.link_between(pair[0], pair[1])?;
            let link = t.link(id);
            links.push(id);
            directed.push(link.directed_from(pair[0]));
            length_km += link.length_km;
        }
        Some(Path {
            nodes,
            links,
            directed,
            length_km,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    /// Directed link states traversed from source to destination.
    pub fn directed_links(&self) -> &[DirectedLink] {
        &self.directed
    }

    pub fn length_km(&self) -> f64 {
        self.length_km
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn contains_link(&self, link: LinkId) -> bool {
        self.links.contains(&link)
    }

    pub fn shares_link_with(&self, other: &Path) -> bool {
        self.links.iter().any(|l| other.contains_link(*l))
    }

    /// Order by length, then node sequence.
    pub fn route_order(&self, other: &Path) -> Ordering {
        compare_routes(self.length_km, &self.nodes, other.length_km, &other.nodes)
    }
}

pub(crate) fn compare_routes(la: f64, na: &[NodeId], lb: f64, nb: &[NodeId]) -> Ordering {
    if nearly_equal(la, lb) {
        na.cmp(nb)
    } else {
        la.total_cmp(&lb)
    }
}

/// Canonical (sorted, deduplicated) set of links to avoid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ExclusionSet(Vec<LinkId>);

impl ExclusionSet {
    pub fn new() -> Self {
        ExclusionSet(Vec::new())
    }

    pub fn links(&self) -> &[LinkId] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, link: LinkId) -> bool {
        self.0.binary_search(&link).is_ok()
    }

    pub fn insert(&mut self, link: LinkId) {
        if let Err(pos) = self.0.binary_search(&link) {
            self.0.insert(pos, link);
        }
    }

    pub fn extend(&mut self, links: impl IntoIterator<Item = LinkId>) {
        for l in links {
            self.insert(l);
        }
    }
}

impl FromIterator<LinkId> for ExclusionSet {
    fn from_iter<I: IntoIterator<Item = LinkId>>(iter: I) -> Self {
        let mut v: Vec<LinkId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ExclusionSet(v)
    }
}

/// Source of exclusion-keyed shortest paths over static link weights.
pub trait PathFinder {
    fn topology(&self) -> &Topology;

    fn shortest(&mut self, s: NodeId, d: NodeId, excluded: &ExclusionSet) -> Option<Arc<Path>>;
}

/// Length-weighted shortest paths computed on every call.
#[derive(Debug, Clone, Copy)]
pub struct Uncached<'a>(pub &'a Topology);

impl PathFinder for Uncached<'_> {
    fn topology(&self) -> &Topology {
        self.0
    }

    fn shortest(&mut self, s: NodeId, d: NodeId, excluded: &ExclusionSet) -> Option<Arc<Path>> {
        shortest_path_by(self.0, s, d, excluded, |dl| self.0.link(dl.link()).length_km).map(Arc::new)
    }
}

/// Length-weighted shortest paths served through a [`PathCache`], plus a
/// per-pair memo of K-shortest candidate lists.
#[derive(Debug)]
pub struct Router<'a> {
    topology: &'a Topology,
    paths: PathCache,
    ksp: Memo<(NodeId, NodeId, usize), Arc<Vec<Arc<Path>>>>,
    computations: u64,
}

impl<'a> Router<'a> {
    pub fn new(topology: &'a Topology, caching: bool) -> Self {
        Router {
            topology,
            paths: PathCache::new(caching),
            ksp: Memo::new(caching),
            computations: 0,
        }
    }

    /// Up to `k` shortest loop-free paths, memoized per `(s, d, k)`.
    pub fn k_shortest(&mut self, s: NodeId, d: NodeId, k: usize) -> Arc<Vec<Arc<Path>>> {
        let topology = self.topology;
        let computations = &mut self.computations;
        self.ksp.lookup_or_compute((s, d, k), || {
            *computations += 1;
            Arc::new(yen_ksp(topology, s, d, k).into_iter().map(Arc::new).collect())
        })
    }

    pub fn stats(&self) -> CacheStats {
        self.paths.stats() + self.ksp.stats()
    }

    /// Number of path searches actually executed (cache misses that ran).
    pub fn computations(&self) -> u64 {
        self.computations
    }

    pub fn cache(&self) -> &PathCache {
        &self.paths
    }
}

impl PathFinder for Router<'_> {
    fn topology(&self) -> &Topology {
        self.topology
    }

    fn shortest(&mut self, s: NodeId, d: NodeId, excluded: &ExclusionSet) -> Option<Arc<Path>> {
        let topology = self.topology;
        let computations = &mut self.computations;
        let key = PathCacheKey::new(s, d, excluded.clone());
        self.paths.lookup_or_compute(key, || {
            *computations += 1;
            shortest_path_by(topology, s, d, excluded, |dl| topology.link(dl.link()).length_km)
                .map(Arc::new)
        })
    }
}

pub(crate) fn unwrap_path(p: Arc<Path>) -> Path {
    Arc::try_unwrap(p).unwrap_or_else(|p| (*p).clone())
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use proptest::prelude::*;

    /// Random connected graphs with 3..=8 nodes and integer lengths.
    pub fn arb_graph() -> impl Strategy<Value = Topology> {
        (3usize..=8)
            .prop_flat_map(|n| {
                let pairs: Vec<(usize, usize)> =
                    (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
                let m = pairs.len();
                (
                    Just(n),
                    Just(pairs),
                    proptest::collection::vec(any::<bool>(), m),
                    proptest::collection::vec(1u32..20, m),
                    proptest::collection::vec(1u32..20, n),
                )
            })
            .prop_map(|(n, pairs, keep, lens, spine)| {
                // A spanning path keeps the graph connected.
                let mut links: Vec<(usize, usize, f64)> =
                    (1..n).map(|i| (i - 1, i, spine[i] as f64)).collect();
                for ((&(a, b), k), len) in pairs.iter().zip(keep).zip(lens) {
                    if k && b != a + 1 {
                        links.push((a, b, len as f64));
                    }
                }
                Topology::new("random", n, links).unwrap()
            })
    }


    /// Every simple path from `s` to `d` avoiding `excluded`, sorted by
    /// (length, node sequence). Exhaustive DFS; for small graphs only.
    pub fn all_simple_paths(t: &Topology, s: NodeId, d: NodeId, excluded: &[LinkId]) -> Vec<Path> {
        fn dfs(
            t: &Topology,
            d: NodeId,
            excluded: &[LinkId],
            stack: &mut Vec<NodeId>,
            out: &mut Vec<Path>,
        ) {
            let cur = *stack.last().unwrap();
            if cur == d {
                out.push(Path::from_nodes(t, stack.clone()).unwrap());
                return;
            }
            for &(n, l) in t.neighbors(cur) {
                if excluded.contains(&l) || stack.contains(&n) {
                    continue;
                }
                stack.push(n);
                dfs(t, d, excluded, stack, out);
                stack.pop();
            }
        }
        let mut out = Vec::new();
        dfs(t, d, excluded, &mut vec![s], &mut out);
        out.sort_by(|a, b| a.route_order(b));
        out
    }
}
