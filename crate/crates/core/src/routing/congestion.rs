use std::sync::Arc;

use super::{unwrap_path, ExclusionSet, Path, PathFinder, Uncached};
use crate::spectrum::NetworkState;
use crate::topology::{LinkId, NodeId, Topology};

/// The most occupied link of `path`, by spectrum occupancy ratio of the
/// directed state the path traverses. Ties go to the earliest hop.
pub fn congested_link(state: &NetworkState, path: &Path) -> LinkId {
    let mut best = (path.directed_links()[0], f64::NEG_INFINITY);
    for &dl in path.directed_links() {
        let sor = state.sor(dl);
        if sor > best.1 {
            best = (dl, sor);
        }
    }
    best.0.link()
}

/// Congestion-aware alternative: finds the most occupied link of
/// `prev_path` and returns the shortest path avoiding it together with the
/// congested links of all earlier candidates (`prev_lmax`).
pub fn ca_alternative_path(
    t: &Topology,
    state: &NetworkState,
    s: NodeId,
    d: NodeId,
    prev_path: &Path,
    prev_lmax: &[LinkId],
) -> (Option<Path>, LinkId) {
    let (path, lmax) = ca_alternative_path_with(&mut Uncached(t), state, s, d, prev_path, prev_lmax);
    (path.map(unwrap_path), lmax)
}

pub fn ca_alternative_path_with(
    finder: &mut impl PathFinder,
    state: &NetworkState,
    s: NodeId,
    d: NodeId,
    prev_path: &Path,
    prev_lmax: &[LinkId],
) -> (Option<Arc<Path>>, LinkId) {
    let lmax = congested_link(state, prev_path);
    let excluded: ExclusionSet = prev_lmax.iter().copied().chain([lmax]).collect();
    (finder.shortest(s, d, &excluded), lmax)
}
