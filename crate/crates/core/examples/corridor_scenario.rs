//! Nine-node corridor network where the two shortest routes into node 8
//! are full. Shows which candidates every policy tries and who succeeds.

use sdm_rmcsa::engine::Rmcsa;
use sdm_rmcsa::modulation::ModulationTable;
use sdm_rmcsa::spectrum::NetworkState;
use sdm_rmcsa::topology::NodeId;
use sdm_rmcsa::traffic::Request;
use sdm_rmcsa::{Policy, PolicyConfig, SpectrumConfig, Topology};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = Topology::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/topologies/corridor.toml"))?;
    let cfg = SpectrumConfig::default();
    let mut base = NetworkState::new(t.directed_link_count(), &cfg);
    for (a, b) in [(1, 8), (2, 8)] {
        let dl = t.link(t.link_between(NodeId(a), NodeId(b)).unwrap()).directed_from(NodeId(a));
        for core in 0..cfg.cores {
            base.allocate(&[dl], core, 0, cfg.slots_per_core, f64::INFINITY)?;
        }
    }
    let req = Request { id: 0, s: NodeId(0), d: NodeId(8), bandwidth_gbps: 100.0, t_arrival: 0.0, t_hold: 1.0 };

    for policy in Policy::ALL {
        let mut state = base.clone();
        let mut r = Rmcsa::new(&t, PolicyConfig::new(policy), ModulationTable::default()).with_trace();
        let decision = r.serve(&req, &mut state);
        println!("{policy}");
        if let Some(trace) = r.last_trace() {
            for (i, p) in trace.paths.iter().enumerate() {
                let nodes: Vec<String> = p.nodes().iter().map(|n| n.0.to_string()).collect();
                println!("  candidate {} {:>6.0} km  {}", i + 1, p.length_km(), nodes.join("-"));
            }
            if !trace.excluded_lmax.is_empty() {
                let ids: Vec<usize> = trace.excluded_lmax.iter().map(|l| l.0).collect();
                println!("  congested links excluded: {ids:?}");
            }
        }
        match decision.accepted() {
            Some(a) => println!(
                "  accepted on candidate {} (core {}, slots {}..{})",
                a.candidate_index,
                a.allocation.core,
                a.allocation.start_slot,
                a.allocation.start_slot + a.allocation.data_slots
            ),
            None => println!("  blocked"),
        }
    }
    Ok(())
}
