//! Candidate paths each policy would examine between two nodes, with one
//! congested corridor, plus the path cache at work.
//!
//! ```text
//! cargo run --example routing_candidates -- [src] [dst]
//! ```

use sdm_rmcsa::routing::{
    ca_alternative_path_with, ca_disjoint_path_with, k_disjoint_paths, yen_ksp, Path, PathFinder, Router,
};
use sdm_rmcsa::spectrum::NetworkState;
use sdm_rmcsa::topology::NodeId;
use sdm_rmcsa::{SpectrumConfig, Topology};

fn show(label: &str, p: &Path) {
    let nodes: Vec<String> = p.nodes().iter().map(|n| n.0.to_string()).collect();
    println!("  {label:<6} {:>7.1} km  {} hops  {}", p.length_km(), p.hops(), nodes.join("-"));
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = Topology::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/topologies/german.toml"))?;
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let s = NodeId(args.next().transpose()?.unwrap_or(3));
    let d = NodeId(args.next().transpose()?.unwrap_or(6));

    println!("K-shortest, {} -> {}", s.0, d.0);
    for (i, p) in yen_ksp(&t, s, d, 3).iter().enumerate() {
        show(&format!("P{}", i + 1), p);
    }
    println!("link-disjoint");
    for (i, p) in k_disjoint_paths(&t, s, d, 3).iter().enumerate() {
        show(&format!("P{}", i + 1), p);
    }

    // Load the middle hop of the shortest path so it becomes the bottleneck.
    let cfg = SpectrumConfig::default();
    let mut state = NetworkState::new(t.directed_link_count(), &cfg);
    let mut router = Router::new(&t, true);
    let p1 = router.shortest(s, d, &Default::default()).ok_or("no path")?;
    let busy = p1.directed_links()[p1.hops() / 2];
    state.allocate(&[busy], 0, 0, 200, f64::INFINITY)?;

    println!("congestion-aware (busy link {})", busy.link().0);
    show("P1", &p1);
    let mut lmax = Vec::new();
    let mut prev = p1.clone();
    for k in 2..=3 {
        let candidate = if k < 3 {
            let (p, l) = ca_alternative_path_with(&mut router, &state, s, d, &prev, &lmax);
            lmax.push(l);
            p
        } else {
            lmax.push(sdm_rmcsa::routing::congested_link(&state, &prev));
            ca_disjoint_path_with(&mut router, s, d, &p1, &lmax)
        };
        match candidate {
            Some(p) => {
                show(&format!("P{k}"), &p);
                prev = p;
            }
            None => println!("  P{k}     none"),
        }
    }

    // The second request between the same pair is served from the cache.
    for _ in 0..2 {
        router.shortest(s, d, &lmax.iter().copied().collect());
    }
    let stats = router.stats();
    println!("cache: {} hits, {} misses, {} searches", stats.hits, stats.misses, router.computations());
    Ok(())
}
