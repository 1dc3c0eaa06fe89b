//! Writes the first requests of a seeded stream as text, one per line.
//!
//! ```text
//! cargo run --example request_stream_dump -- [count] [seed] > stream.txt
//! ```

use std::io;

use sdm_rmcsa::traffic::{write_stream, RequestGenerator};
use sdm_rmcsa::{Topology, TrafficConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(Ok(20), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |a| a.parse())?;
    let t = Topology::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/topologies/german.toml"))?;
    let cfg = TrafficConfig { total_requests: count, warmup_requests: 0, seed, ..TrafficConfig::default() }
        .with_load(1000.0, t.node_count());
    let stream: Vec<_> = RequestGenerator::new(t.node_count(), &cfg).collect();
    write_stream(io::stdout().lock(), &stream)?;
    Ok(())
}
