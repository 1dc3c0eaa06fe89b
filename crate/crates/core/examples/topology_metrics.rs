//! Structural summary of a topology file: degree, link lengths and link
//! betweenness.
//!
//! ```text
//! cargo run --example topology_metrics -- [topology.toml]
//! ```

use sdm_rmcsa::topology::LinkId;
use sdm_rmcsa::Topology;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/topologies/europe.toml").into());
    let t = Topology::from_file(&path)?;
    let s = t.summary();
    let m = t.metrics();

    println!("{}: {} nodes, {} links", t.name(), s.nodes, s.links);
    println!("  average degree      {:.3}", s.d_avg);
    println!("  average link length {:.1} km", s.l_avg_km);
    println!("  longest link        {:.1} km", t.max_link_length());
    println!("  shortest paths      {}", m.shortest_path_count);
    println!("  sigma(LBC)          {:.4}", m.sigma_lbc);
    if !t.low_degree_nodes().is_empty() {
        println!("  degree-1 nodes      {:?}", t.low_degree_nodes());
    }

    let mut ranked: Vec<(usize, f64)> = m.lbc.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("\n  busiest links by betweenness");
    for &(l, lbc) in ranked.iter().take(8) {
        let link = t.link(LinkId(l));
        println!("    {:>2}-{:<2} {:>7.1} km  {:.4}", link.u.0, link.v.0, link.length_km, lbc);
    }
    Ok(())
}
