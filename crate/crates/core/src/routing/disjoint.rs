use std::sync::Arc;

use super::{unwrap_path, ExclusionSet, Path, PathFinder, Uncached};
use crate::topology::{LinkId, NodeId, Topology};

/// Greedy link-disjoint candidates: each path is the shortest one avoiding
/// every link of the paths before it.
pub fn k_disjoint_paths(t: &Topology, s: NodeId, d: NodeId, k: usize) -> Vec<Path> {
    k_disjoint_paths_with(&mut Uncached(t), s, d, k)
        .into_iter()
        .map(unwrap_path)
        .collect()
}

pub fn k_disjoint_paths_with(
    finder: &mut impl PathFinder,
    s: NodeId,
    d: NodeId,
    k: usize,
) -> Vec<Arc<Path>> {
    let mut excluded = ExclusionSet::new();
    let mut out = Vec::new();
    while out.len() < k {
        let Some(p) = finder.shortest(s, d, &excluded) else {
            break;
        };
        excluded.extend(p.links().iter().copied());
        out.push(p);
    }
    out
}

/// Shortest path avoiding every link of `p1` and every link in `lmax_list`.
/// Any result is link-disjoint from `p1`.
pub fn ca_disjoint_path(
    t: &Topology,
    s: NodeId,
    d: NodeId,
    p1: &Path,
    lmax_list: &[LinkId],
) -> Option<Path> {
    ca_disjoint_path_with(&mut Uncached(t), s, d, p1, lmax_list).map(unwrap_path)
}

pub fn ca_disjoint_path_with(
    finder: &mut impl PathFinder,
    s: NodeId,
    d: NodeId,
    p1: &Path,
    lmax_list: &[LinkId],
) -> Option<Arc<Path>> {
    let excluded: ExclusionSet = p1.links().iter().chain(lmax_list).copied().collect();
    finder.shortest(s, d, &excluded)
}
