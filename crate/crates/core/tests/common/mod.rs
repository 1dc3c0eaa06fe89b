#![allow(dead_code)]

use std::path::PathBuf;

use sdm_rmcsa::spectrum::NetworkState;
use sdm_rmcsa::topology::{LinkId, NodeId, Topology};
use sdm_rmcsa::traffic::Request;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn topology(name: &str) -> Topology {
    Topology::from_file(data(&format!("topologies/{name}.toml"))).unwrap()
}

/// Fills every core of `link` in the `from -> other end` direction.
pub fn saturate(t: &Topology, state: &mut NetworkState, link: LinkId, from: NodeId) {
    let dl = t.link(link).directed_from(from);
    let cfg = state.config().clone();
    for core in 0..cfg.cores {
        state.allocate(&[dl], core, 0, cfg.slots_per_core, f64::INFINITY).unwrap();
    }
}

/// The corridor fixture with links 1-8 and 2-8 full towards node 8.
pub fn corridor_state(t: &Topology, cfg: &sdm_rmcsa::SpectrumConfig) -> NetworkState {
    let mut state = NetworkState::new(t.directed_link_count(), cfg);
    for (a, b) in [(1, 8), (2, 8)] {
        let l = t.link_between(NodeId(a), NodeId(b)).unwrap();
        saturate(t, &mut state, l, NodeId(a));
    }
    state
}

pub fn request(id: u64, s: usize, d: usize, b: f64) -> Request {
    Request {
        id,
        s: NodeId(s),
        d: NodeId(d),
        bandwidth_gbps: b,
        t_arrival: 0.0,
        t_hold: 1.0,
    }
}

/// Erlang-B blocking for `servers` circuits by the standard recursion.
pub fn erlang_b(erlangs: f64, servers: usize) -> f64 {
    (1..=servers).fold(1.0, |b, k| erlangs * b / (k as f64 + erlangs * b))
}
