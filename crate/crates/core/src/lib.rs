//! Event-driven simulator for routing, modulation, core and spectrum
//! assignment (RMCSA) in elastic optical networks built on multi-core fiber.
//!
//! The pieces, bottom up:
//!
//! - [`topology`]: undirected weighted graphs, TOML loading, summary metrics.
//! - [`spectrum`]: per-link, per-core slot bitmaps with first-fit search.
//! - [`modulation`]: reach-based modulation choice and slot counts.
//! - [`routing`]: Dijkstra with exclusions, Yen, disjoint and
//!   congestion-aware candidates, and the path cache.
//! - [`traffic`]: seeded Poisson request streams.
//! - [`engine`]: the five serving policies and the event loop.
//! - [`metrics`]: blocking, utilization, latency and hop metrics.
//! - [`experiment`]: configuration files and parallel sweeps.

pub mod engine;
pub mod experiment;
pub mod metrics;
pub mod modulation;
pub mod routing;
pub mod spectrum;
pub mod topology;
pub mod traffic;

pub use engine::{run_simulation, Policy, PolicyConfig, RunReport, SimOptions, Simulation};
pub use spectrum::{NetworkState, SpectrumConfig};
pub use topology::Topology;
pub use traffic::TrafficConfig;
