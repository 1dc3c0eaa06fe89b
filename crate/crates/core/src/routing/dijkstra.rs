use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{ExclusionSet, Path};
use crate::topology::{nearly_equal, DirectedLink, LinkId, NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Minimum-weight path from `s` to `d` over allowed links and nodes, ties
/// broken by lexicographically smallest node sequence. Weights must be
/// strictly positive.
///
/// Runs Dijkstra backwards from `d`, then walks forward from `s` taking the
/// smallest-id neighbor that stays on a tight edge.
pub(crate) fn lex_shortest(
    t: &Topology,
    s: NodeId,
    d: NodeId,
    link_allowed: impl Fn(LinkId) -> bool,
    node_allowed: impl Fn(NodeId) -> bool,
    weight: impl Fn(DirectedLink) -> f64,
) -> Option<Path> {
    if s == d {
        return None;
    }
    let n = t.node_count();
    let mut to_d = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    to_d[d.0] = 0.0;
    heap.push(Reverse((Cost(0.0), d)));
    while let Some(Reverse((Cost(du), u))) = heap.pop() {
        if du > to_d[u.0] {
            continue;
        }
        if u == s {
            break;
        }
        for &(v, l) in t.neighbors(u) {
            if !link_allowed(l) || !node_allowed(v) {
                continue;
            }
            let cand = du + weight(t.link(l).directed_from(v));
            if cand < to_d[v.0] {
                to_d[v.0] = cand;
                heap.push(Reverse((Cost(cand), v)));
            }
        }
    }
    if !to_d[s.0].is_finite() {
        return None;
    }
    let mut nodes = vec![s];
    let mut cur = s;
    while cur != d {
        let next = t.neighbors(cur).iter().find(|&&(v, l)| {
            link_allowed(l)
                && node_allowed(v)
                && to_d[v.0] < to_d[cur.0]
                && nearly_equal(weight(t.link(l).directed_from(cur)) + to_d[v.0], to_d[cur.0])
        });
        let &(v, _) = next?;
        nodes.push(v);
        cur = v;
    }
    Path::from_nodes(t, nodes)
}

/// Shortest path by per-link `weights`, ignoring `excluded` links.
pub fn shortest_path(
    t: &Topology,
    s: NodeId,
    d: NodeId,
    excluded: &ExclusionSet,
    weights: &[f64],
) -> Option<Path> {
    shortest_path_by(t, s, d, excluded, |dl| weights[dl.link().index()])
}

/// Shortest path with a weight per directed link.
pub fn shortest_path_by(
    t: &Topology,
    s: NodeId,
    d: NodeId,
    excluded: &ExclusionSet,
    weight: impl Fn(DirectedLink) -> f64,
) -> Option<Path> {
    lex_shortest(t, s, d, |l| !excluded.contains(l), |_| true, weight)
}
