//! Dynamic request workload.
//!
//! Per-node Poisson arrivals at rate λ superpose into one Poisson process at
//! rate λ·|V| with a uniformly chosen source, which is how requests are
//! generated here. Holding times are exponential with mean 1/μ.
//!
//! Randomness comes from ChaCha12 seeded with the run seed. Each draw
//! category uses its own ChaCha stream number, so changing how one category
//! is sampled never shifts the others:
//!
//! | stream | draws                      |
//! |--------|----------------------------|
//! | 0      | inter-arrival times        |
//! | 1      | source and destination     |
//! | 2      | bandwidth class            |
//! | 3      | holding time               |

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    /// Arrival rate per node.
    pub lambda_per_node: f64,
    /// Departure rate; the mean holding time is `1 / mu`.
    pub mu: f64,
    pub bandwidth_set: Vec<f64>,
    pub total_requests: usize,
    pub warmup_requests: usize,
    pub seed: u64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            lambda_per_node: 1.0,
            mu: 1.0,
            bandwidth_set: vec![25.0, 50.0, 75.0, 100.0, 125.0, 150.0],
            total_requests: 100_000,
            warmup_requests: 10_000,
            seed: 1,
        }
    }
}

impl TrafficConfig {
    /// Offered load in Erlangs: `(λ / μ) · |V|`.
    pub fn offered_load(&self, nodes: usize) -> f64 {
        self.lambda_per_node / self.mu * nodes as f64
    }

    /// Sets λ so the offered load equals `erlangs` on `nodes` nodes.
    pub fn with_load(mut self, erlangs: f64, nodes: usize) -> Self {
        self.lambda_per_node = erlangs * self.mu / nodes as f64;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub s: NodeId,
    pub d: NodeId,
    pub bandwidth_gbps: f64,
    pub t_arrival: f64,
    pub t_hold: f64,
}

enum Stream {
    Arrivals = 0,
    Endpoints = 1,
    Bandwidth = 2,
    Holding = 3,
}

fn substream(seed: u64, stream: Stream) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Lazily generates the request sequence for one run.
#[derive(Debug, Clone)]
pub struct RequestGenerator {
    nodes: usize,
    bandwidths: Vec<f64>,
    remaining: usize,
    next_id: u64,
    clock: f64,
    inter_arrival: Exp<f64>,
    holding: Exp<f64>,
    arrivals: ChaCha12Rng,
    endpoints: ChaCha12Rng,
    bandwidth: ChaCha12Rng,
    hold: ChaCha12Rng,
}

impl RequestGenerator {
    /// # Panics
    ///
    /// If the topology has fewer than two nodes, the bandwidth set is empty,
    /// or λ or μ is not positive.
    pub fn new(nodes: usize, cfg: &TrafficConfig) -> Self {
        assert!(nodes >= 2, "need at least two nodes");
        assert!(!cfg.bandwidth_set.is_empty(), "bandwidth set is empty");
        let rate = cfg.lambda_per_node * nodes as f64;
        RequestGenerator {
            nodes,
            bandwidths: cfg.bandwidth_set.clone(),
            remaining: cfg.total_requests,
            next_id: 0,
            clock: 0.0,
            inter_arrival: Exp::new(rate).expect("arrival rate must be positive"),
            holding: Exp::new(cfg.mu).expect("mu must be positive"),
            arrivals: substream(cfg.seed, Stream::Arrivals),
            endpoints: substream(cfg.seed, Stream::Endpoints),
            bandwidth: substream(cfg.seed, Stream::Bandwidth),
            hold: substream(cfg.seed, Stream::Holding),
        }
    }
}

impl Iterator for RequestGenerator {
    type Item = Request;

    fn next(&mut self) -> Option<Request> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.clock += self.inter_arrival.sample(&mut self.arrivals);
        let s = self.endpoints.random_range(0..self.nodes);
        // Uniform over the other |V| - 1 nodes.
        let mut d = self.endpoints.random_range(0..self.nodes - 1);
        if d >= s {
            d += 1;
        }
        let bandwidth_gbps = self.bandwidths[self.bandwidth.random_range(0..self.bandwidths.len())];
        let mut t_hold = self.holding.sample(&mut self.hold);
        while t_hold <= 0.0 {
            t_hold = self.holding.sample(&mut self.hold);
        }
        let request = Request {
            id: self.next_id,
            s: NodeId(s),
            d: NodeId(d),
            bandwidth_gbps,
            t_arrival: self.clock,
            t_hold,
        };
        self.next_id += 1;
        Some(request)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

pub fn generate_request_stream(t: &Topology, cfg: &TrafficConfig) -> Vec<Request> {
    RequestGenerator::new(t.node_count(), cfg).collect()
}

/// Writes one whitespace-separated record per line:
/// `id s d bandwidth_gbps t_arrival t_hold`.
pub fn write_stream<'a>(
    mut out: impl Write,
    requests: impl IntoIterator<Item = &'a Request>,
) -> io::Result<()> {
    writeln!(out, "# id s d bandwidth_gbps t_arrival t_hold")?;
    for r in requests {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            r.id, r.s, r.d, r.bandwidth_gbps, r.t_arrival, r.t_hold
        )?;
    }
    Ok(())
}

/// Parses the format written by [`write_stream`].
pub fn read_stream(source: &str) -> Result<Vec<Request>, String> {
    source
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, line)| {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 {
                return Err(format!("line {}: expected 6 fields", i + 1));
            }
            let bad = |e: &dyn std::fmt::Display| format!("line {}: {e}", i + 1);
            Ok(Request {
                id: f[0].parse().map_err(|e| bad(&e))?,
                s: NodeId(f[1].parse().map_err(|e| bad(&e))?),
                d: NodeId(f[2].parse().map_err(|e| bad(&e))?),
                bandwidth_gbps: f[3].parse().map_err(|e| bad(&e))?,
                t_arrival: f[4].parse().map_err(|e| bad(&e))?,
                t_hold: f[5].parse().map_err(|e| bad(&e))?,
            })
        })
        .collect()
}
