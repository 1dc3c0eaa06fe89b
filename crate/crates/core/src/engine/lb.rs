use serde::Serialize;

use crate::spectrum::NetworkState;
use crate::topology::{DirectedLink, Topology};

/// Floor added to every weight (relative to the normalized length) so that
/// weights stay strictly positive when the length term is switched off.
const WEIGHT_FLOOR: f64 = 1e-6;

/// Frozen load-balancing link weights
/// `alpha * L / L_max + (1 - alpha) * SOR`, one per directed link.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbWeightSnapshot {
    weights: Vec<f64>,
    pub snapshot_request_count: u64,
}

impl LbWeightSnapshot {
    pub fn compute(t: &Topology, state: &NetworkState, alpha: f64, request_count: u64) -> Self {
        let l_max = t.max_link_length();
        let weights = (0..t.directed_link_count())
            .map(|i| {
                let dl = DirectedLink(i);
                let norm_len = t.link(dl.link()).length_km / l_max;
                alpha * norm_len + (1.0 - alpha) * state.sor(dl) + WEIGHT_FLOOR * norm_len
            })
            .collect();
        LbWeightSnapshot {
            weights,
            snapshot_request_count: request_count,
        }
    }

    pub fn weight(&self, link: DirectedLink) -> f64 {
        self.weights[link.index()]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}
