//! One simulation run of one policy at one load.
//!
//! ```text
//! cargo run --release --example single_run -- [topology.toml] [POLICY] [erlangs] [requests]
//! ```

use std::env;

use sdm_rmcsa::{run_simulation, Policy, PolicyConfig, SimOptions, SpectrumConfig, Topology, TrafficConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = args
        .first()
        .cloned()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/topologies/german.toml").into());
    let policy: Policy = args.get(1).map_or(Ok(Policy::Cala), |s| s.parse())?;
    let load: f64 = args.get(2).map_or(Ok(1000.0), |s| s.parse())?;
    let requests: usize = args.get(3).map_or(Ok(20_000), |s| s.parse())?;

    let topology = Topology::from_file(&path)?;
    let traffic = TrafficConfig {
        total_requests: requests,
        warmup_requests: requests / 10,
        ..TrafficConfig::default()
    }
    .with_load(load, topology.node_count());
    let report = run_simulation(
        &topology,
        &SpectrumConfig::default(),
        &traffic,
        &PolicyConfig::new(policy),
        SimOptions::default(),
    )?;

    let m = &report.metrics;
    println!("{} on {} at {load} Erlangs, {requests} requests", policy, topology.name());
    println!("  RBP  {:.6}", m.rbp);
    println!("  BBP  {:.6}", m.bbp);
    println!("  NRU  {:.4}", m.nru);
    if let (Some(asl), Some(ahl)) = (m.asl_s, m.ahl) {
        println!("  ASL  {:.2} us", asl * 1e6);
        println!("  AHL  {ahl:.3}");
    }
    println!(
        "  cache hit rate {:.3} ({} path searches)",
        report.cache_hit_rate(),
        report.path_computations
    );
    Ok(())
}
