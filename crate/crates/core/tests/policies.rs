mod common;

use common::{corridor_state, request, saturate, topology};
use proptest::prelude::*;
use sdm_rmcsa::engine::{Policy, PolicyConfig, Rmcsa, SimOptions, Simulation};
use sdm_rmcsa::modulation::ModulationTable;
use sdm_rmcsa::routing::{shortest_path, yen_ksp, ExclusionSet, Path};
use sdm_rmcsa::spectrum::{NetworkState, SpectrumConfig};
use sdm_rmcsa::topology::{LinkId, NodeId, Topology};
use sdm_rmcsa::traffic::TrafficConfig;

fn rmcsa(t: &Topology, policy: Policy) -> Rmcsa<'_> {
    Rmcsa::new(t, PolicyConfig::new(policy), ModulationTable::default()).with_trace()
}

fn node_seq(p: &Path) -> Vec<usize> {
    p.nodes().iter().map(|n| n.0).collect()
}

#[test]
fn corridor_ksp_and_kdp_block() {
    let t = topology("corridor");
    let cfg = SpectrumConfig::default();
    for policy in [Policy::Ksp, Policy::Kdp, Policy::Sp] {
        let mut state = corridor_state(&t, &cfg);
        let before = state.clone();
        let mut r = rmcsa(&t, policy);
        let d = r.serve(&request(0, 0, 8, 100.0), &mut state);
        assert!(!d.is_accepted(), "{policy} should block");
        assert_eq!(state, before);
    }
    // KSP looks at 0-1-8, 0-2-8, 0-2-1-8; KDP finds only two disjoint paths.
    let mut state = corridor_state(&t, &cfg);
    let mut r = rmcsa(&t, Policy::Ksp);
    r.serve(&request(0, 0, 8, 100.0), &mut state);
    let seen: Vec<_> = r.last_trace().unwrap().paths.iter().map(|p| node_seq(p)).collect();
    assert_eq!(seen, [vec![0, 1, 8], vec![0, 2, 8], vec![0, 2, 1, 8]]);

    let mut r = rmcsa(&t, Policy::Kdp);
    r.serve(&request(0, 0, 8, 100.0), &mut state);
    assert_eq!(r.last_trace().unwrap().paths.len(), 2);
}

#[test]
fn corridor_cala_accepts_on_third_candidate() {
    let t = topology("corridor");
    let mut state = corridor_state(&t, &SpectrumConfig::default());
    let mut r = rmcsa(&t, Policy::Cala);
    let d = r.serve(&request(0, 0, 8, 100.0), &mut state);
    let a = d.accepted().expect("CALA accepts");
    assert_eq!(a.candidate_index, 3);
    let trace = r.last_trace().unwrap();
    assert_eq!(trace.paths.len(), 3);
    let (p1, p2, p3) = (&trace.paths[0], &trace.paths[1], &trace.paths[2]);
    assert_eq!(node_seq(p1), [0, 1, 8]);
    assert_eq!(node_seq(p2), [0, 2, 8]);
    assert!(!p3.shares_link_with(p1));
    let full: Vec<LinkId> = [(1, 8), (2, 8)]
        .iter()
        .map(|&(a, b)| t.link_between(NodeId(a), NodeId(b)).unwrap())
        .collect();
    assert_eq!(trace.excluded_lmax, full);
    assert!(full.iter().all(|&l| !p3.contains_link(l)));
    // Oracle: the shortest path avoiding P1 and both full links.
    let excluded: ExclusionSet = p1.links().iter().chain(&full).copied().collect();
    let oracle = shortest_path(&t, NodeId(0), NodeId(8), &excluded, &t.lengths()).unwrap();
    assert_eq!(**p3, oracle);
    assert_eq!(a.allocation.links, p3.directed_links());
    state.check_invariants().unwrap();
}

#[test]
fn sp_never_deviates() {
    let t = Topology::new("square", 4, [(0, 1, 100.0), (1, 2, 100.0), (0, 3, 120.0), (3, 2, 120.0)])
        .unwrap();
    let cfg = SpectrumConfig::default();
    let mut state = NetworkState::new(t.directed_link_count(), &cfg);
    saturate(&t, &mut state, LinkId(1), NodeId(1));
    let req = request(0, 0, 2, 50.0);
    assert!(!rmcsa(&t, Policy::Sp).serve(&req, &mut state.clone()).is_accepted());
    let d = rmcsa(&t, Policy::Ksp).serve(&req, &mut state.clone());
    assert_eq!(d.accepted().unwrap().candidate_index, 2);
    let d = rmcsa(&t, Policy::Kdp).serve(&req, &mut state.clone());
    assert_eq!(d.accepted().unwrap().candidate_index, 2);
    let d = rmcsa(&t, Policy::Cala).serve(&req, &mut state);
    assert_eq!(d.accepted().unwrap().candidate_index, 2);
}

#[test]
fn empty_network_uses_first_slot_of_first_core() {
    let t = topology("german");
    let cfg = SpectrumConfig::default();
    for policy in Policy::ALL {
        let mut state = NetworkState::new(t.directed_link_count(), &cfg);
        let d = rmcsa(&t, policy).serve(&request(0, 0, 6, 150.0), &mut state);
        let a = d.accepted().unwrap();
        assert_eq!((a.candidate_index, a.allocation.core, a.allocation.start_slot), (1, 0, 0));
        let sp = shortest_path(&t, NodeId(0), NodeId(6), &ExclusionSet::new(), &t.lengths()).unwrap();
        assert_eq!(a.allocation.links, sp.directed_links(), "{policy}");
    }
}

#[test]
fn triangle_has_two_disjoint_candidates() {
    let t = Topology::new("tri", 3, [(0, 1, 100.0), (1, 2, 100.0), (0, 2, 100.0)]).unwrap();
    let cfg = SpectrumConfig::default();
    let mut state = NetworkState::new(t.directed_link_count(), &cfg);
    saturate(&t, &mut state, LinkId(2), NodeId(0));
    saturate(&t, &mut state, LinkId(0), NodeId(0));
    let mut r = rmcsa(&t, Policy::Kdp);
    assert!(!r.serve(&request(0, 0, 2, 25.0), &mut state).is_accepted());
    assert_eq!(r.last_trace().unwrap().paths.len(), 2);
}

#[test]
fn paths_beyond_reach_are_blocked() {
    let t = Topology::new("far", 3, [(0, 1, 4500.0), (1, 2, 4500.0), (0, 2, 9500.0)]).unwrap();
    let cfg = SpectrumConfig::default();
    for policy in Policy::ALL {
        let mut state = NetworkState::new(t.directed_link_count(), &cfg);
        let d = rmcsa(&t, policy).serve(&request(0, 0, 2, 25.0), &mut state);
        assert!(!d.is_accepted(), "{policy}");
        assert_eq!(state.active_count(), 0);
    }
}

#[test]
fn candidates_over_reach_are_skipped_not_fatal() {
    // P1 is full, P2 (9000 km) is out of reach, P3 is usable.
    let t = Topology::new(
        "skip",
        4,
        [(0, 3, 100.0), (0, 1, 4500.0), (1, 3, 4500.0), (0, 2, 4000.0), (2, 3, 5100.0)],
    )
    .unwrap();
    let cfg = SpectrumConfig::default();
    let mut state = NetworkState::new(t.directed_link_count(), &cfg);
    saturate(&t, &mut state, LinkId(0), NodeId(0));
    let mut r = rmcsa(&t, Policy::Ksp);
    let d = r.serve(&request(0, 0, 3, 25.0), &mut state.clone());
    assert!(!d.is_accepted());
    let mut r = rmcsa(&t, Policy::Kdp);
    let d = r.serve(&request(0, 0, 3, 25.0), &mut state);
    assert!(!d.is_accepted(), "all candidates past the first exceed reach");
    assert_eq!(r.last_trace().unwrap().paths.len(), 3);
}

#[test]
fn cala_retry_is_served_from_cache() {
    let t = topology("corridor");
    let cfg = SpectrumConfig::default();
    let mut r = Rmcsa::new(&t, PolicyConfig::new(Policy::Cala), ModulationTable::default());
    // Fill the detour as well so the request blocks after three candidates.
    let mut state = corridor_state(&t, &cfg);
    let l = t.link_between(NodeId(2), NodeId(3)).unwrap();
    saturate(&t, &mut state, l, NodeId(2));
    assert!(!r.serve(&request(0, 0, 8, 50.0), &mut state).is_accepted());
    let searches = r.path_computations();
    let misses = r.cache_stats().misses;
    assert_eq!(searches, 3);
    assert!(!r.serve(&request(1, 0, 8, 50.0), &mut state).is_accepted());
    assert_eq!(r.path_computations(), searches);
    assert_eq!(r.cache_stats().misses, misses);
    assert_eq!(r.cache_stats().hits, 3);
}

/// Two corridors from 0 to 3: short (0-1-3) and long (0-2-3).
fn two_corridors() -> Topology {
    Topology::new("corridors", 4, [(0, 1, 100.0), (1, 3, 100.0), (0, 2, 150.0), (2, 3, 150.0)])
        .unwrap()
}

#[test]
fn lb_alpha_zero_avoids_busy_corridor() {
    let t = two_corridors();
    let cfg = SpectrumConfig::default();
    let mut state = NetworkState::new(t.directed_link_count(), &cfg);
    // Half fill the short corridor so SOR, not reachability, steers LB.
    for link in [LinkId(0), LinkId(1)] {
        let from = t.link(link).u;
        let dl = t.link(link).directed_from(from);
        for core in 0..2 {
            state.allocate(&[dl], core, 0, cfg.slots_per_core, f64::INFINITY).unwrap();
        }
    }
    let mut policy = PolicyConfig::new(Policy::Lb);
    policy.lb_alpha = 0.0;
    let mut r = Rmcsa::new(&t, policy, ModulationTable::default()).with_trace();
    r.refresh_lb(&state, 0);
    let snapshot = r.lb_snapshot().unwrap().clone();
    let d = r.serve(&request(0, 0, 3, 25.0), &mut state);
    let chosen = &r.last_trace().unwrap().paths[0];
    // Oracle: minimum snapshot weight over every simple path.
    let best = yen_ksp(&t, NodeId(0), NodeId(3), 10)
        .into_iter()
        .min_by(|a, b| {
            let w = |p: &Path| p.directed_links().iter().map(|&dl| snapshot.weight(dl)).sum::<f64>();
            w(a).total_cmp(&w(b))
        })
        .unwrap();
    assert_eq!(**chosen, best);
    assert_eq!(node_seq(chosen), [0, 2, 3]);
    assert!(d.is_accepted());
}

#[test]
fn lb_snapshot_refreshes_every_interval() {
    let t = topology("german");
    let traffic = TrafficConfig {
        total_requests: 3100,
        warmup_requests: 0,
        ..TrafficConfig::default()
    }
    .with_load(3000.0, t.node_count());
    let mut sim = Simulation::new(
        &t,
        &SpectrumConfig::default(),
        &traffic,
        &PolicyConfig::new(Policy::Lb),
        SimOptions::default(),
    )
    .unwrap();
    let mut last = None;
    let mut refreshes = Vec::new();
    while let Some(_) = sim.step().unwrap() {
        let count = sim.rmcsa().lb_snapshot().unwrap().snapshot_request_count;
        if last != Some(count) {
            refreshes.push(count);
            last = Some(count);
        }
    }
    assert_eq!(refreshes, [0, 1500, 3000]);
}

fn random_state(t: &Topology, fills: &[(usize, usize, usize, usize)]) -> NetworkState {
    let cfg = SpectrumConfig::default();
    let mut state = NetworkState::new(t.directed_link_count(), &cfg);
    for &(dl, core, start, width) in fills {
        let dl = sdm_rmcsa::topology::DirectedLink(dl % t.directed_link_count());
        let start = start % cfg.slots_per_core;
        let width = width.min(cfg.slots_per_core - start).max(1);
        let _ = state.allocate(&[dl], core % cfg.cores, start, width, f64::INFINITY);
    }
    state
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alternatives_accept_whenever_sp_does(
        fills in proptest::collection::vec((0usize..52, 0usize..4, 0usize..320, 1usize..320), 0..200),
        s in 0usize..17,
        d in 0usize..16,
        b in prop::sample::select(vec![25.0, 50.0, 75.0, 100.0, 125.0, 150.0]),
    ) {
        let t = topology("german");
        let d = if d >= s { d + 1 } else { d };
        let state = random_state(&t, &fills);
        let req = request(0, s, d, b);
        let sp = rmcsa(&t, Policy::Sp).serve(&req, &mut state.clone());
        for policy in [Policy::Ksp, Policy::Cala, Policy::Kdp] {
            let other = rmcsa(&t, policy).serve(&req, &mut state.clone());
            if sp.is_accepted() {
                prop_assert!(other.is_accepted());
                prop_assert_eq!(&other.accepted().unwrap().allocation, &sp.accepted().unwrap().allocation);
            }
        }
    }

    #[test]
    fn lb_with_full_length_weight_routes_like_sp(
        fills in proptest::collection::vec((0usize..52, 0usize..4, 0usize..320, 1usize..320), 0..200),
        s in 0usize..17,
        d in 0usize..16,
    ) {
        let t = topology("german");
        let d = if d >= s { d + 1 } else { d };
        let mut state = random_state(&t, &fills);
        let mut policy = PolicyConfig::new(Policy::Lb);
        policy.lb_alpha = 1.0;
        let mut lb = Rmcsa::new(&t, policy, ModulationTable::default()).with_trace();
        lb.refresh_lb(&state, 0);
        let mut sp = rmcsa(&t, Policy::Sp);
        let req = request(0, s, d, 25.0);
        lb.serve(&req, &mut state.clone());
        sp.serve(&req, &mut state);
        prop_assert_eq!(&lb.last_trace().unwrap().paths, &sp.last_trace().unwrap().paths);
    }

    #[test]
    fn cala_candidates_respect_exclusions(
        fills in proptest::collection::vec((0usize..52, 0usize..4, 0usize..320, 100usize..320), 0..300),
        s in 0usize..17,
        d in 0usize..16,
        k in 2usize..5,
    ) {
        let t = topology("german");
        let d = if d >= s { d + 1 } else { d };
        let mut state = random_state(&t, &fills);
        let mut r = Rmcsa::new(&t, PolicyConfig::new(Policy::Cala).with_k(k), ModulationTable::default())
            .with_trace();
        r.serve(&request(0, s, d, 150.0), &mut state);
        let trace = r.last_trace().unwrap();
        prop_assert!(trace.paths.len() <= k);
        for (i, p) in trace.paths.iter().enumerate().skip(1) {
            for l in &trace.excluded_lmax[..i.min(trace.excluded_lmax.len())] {
                prop_assert!(!p.contains_link(*l));
            }
        }
        if trace.paths.len() == k && k > 1 {
            // The last candidate is disjoint from the first whenever it exists.
            let last = trace.paths.last().unwrap();
            if trace.excluded_lmax.len() == k - 1 {
                prop_assert!(!last.shares_link_with(&trace.paths[0]));
            }
        }
    }
}
