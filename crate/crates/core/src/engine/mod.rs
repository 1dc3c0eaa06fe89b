//! Event-driven simulation loop.
//!
//! Arrivals come from a request iterator; departures sit in a min-heap keyed
//! by expiry time. At equal times departures are handled first. The run
//! stops after the last arrival, and lightpaths still active at that point
//! are dropped with their holding time clipped to the observation window.

mod lb;
mod policy;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lb::LbWeightSnapshot;
pub use policy::{Accepted, CandidateTrace, Decision, Outcome, Policy, PolicyConfig, Rmcsa};

use crate::metrics::{MetricsAccumulator, MetricsError, NruDenominator, RunMetrics, TauStart};
use crate::modulation::ModulationTable;
use crate::routing::CacheStats;
use crate::spectrum::{LightpathId, NetworkState, SpectrumConfig, SpectrumError};
use crate::topology::Topology;
use crate::traffic::{Request, RequestGenerator, TrafficConfig};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("spectrum invariant violated: {0}")]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    pub caching: bool,
    /// Check spectrum conservation after every event. Slow.
    pub verify_invariants: bool,
    pub nru_denominator: NruDenominator,
    pub tau_start: TauStart,
    pub modulation: ModulationTable,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            caching: true,
            verify_invariants: false,
            nru_denominator: NruDenominator::default(),
            tau_start: TauStart::default(),
            modulation: ModulationTable::default(),
        }
    }
}

/// Configuration echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub topology: String,
    pub offered_load_erlangs: f64,
    pub spectrum: SpectrumConfig,
    pub traffic: TrafficConfig,
    pub policy: PolicyConfig,
    pub caching: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub echo: RunEcho,
    pub metrics: RunMetrics,
    /// Path cache counters after warm-up.
    pub cache: CacheStats,
    /// Path cache counters over the whole run.
    pub cache_total: CacheStats,
    pub path_computations: u64,
    pub requests_processed: u64,
}

impl RunReport {
    pub fn cache_hit_rate(&self) -> f64 {
        self.cache.hit_rate()
    }
}

/// One processed event.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Arrival {
        request: Request,
        decision: Decision,
        /// Past warm-up, so it counts toward the metrics.
        recorded: bool,
    },
    Departure {
        lightpath: LightpathId,
        time: f64,
    },
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    expiry: f64,
    lightpath: LightpathId,
    recorded: bool,
    slot_hops: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.expiry
            .total_cmp(&other.expiry)
            .then(self.lightpath.cmp(&other.lightpath))
    }
}

pub fn validate(
    topology: &Topology,
    spectrum: &SpectrumConfig,
    traffic: &TrafficConfig,
    policy: &PolicyConfig,
) -> Result<(), EngineError> {
    let fail = |msg: String| Err(EngineError::Config(msg));
    if topology.node_count() < 2 {
        return fail("topology needs at least two nodes".into());
    }
    if spectrum.cores == 0 || spectrum.slots_per_core == 0 || !(spectrum.slot_bandwidth_ghz > 0.0) {
        return fail("spectrum needs at least one core, one slot and a positive slot width".into());
    }
    if !(traffic.lambda_per_node > 0.0 && traffic.lambda_per_node.is_finite()) {
        return fail(format!("arrival rate must be positive, got {}", traffic.lambda_per_node));
    }
    if !(traffic.mu > 0.0 && traffic.mu.is_finite()) {
        return fail(format!("mu must be positive, got {}", traffic.mu));
    }
    if traffic.bandwidth_set.is_empty() || traffic.bandwidth_set.iter().any(|&b| !(b > 0.0)) {
        return fail("bandwidth set must be non-empty and positive".into());
    }
    if policy.k == 0 {
        return fail("k must be at least 1".into());
    }
    if !(0.0..=1.0).contains(&policy.lb_alpha) {
        return fail(format!("lb_alpha must lie in [0, 1], got {}", policy.lb_alpha));
    }
    if policy.lb_update_interval == 0 {
        return fail("lb_update_interval must be at least 1".into());
    }
    Ok(())
}

/// A single run, advanced one event at a time.
pub struct Simulation<'a> {
    topology: &'a Topology,
    spectrum: SpectrumConfig,
    traffic: TrafficConfig,
    options: SimOptions,
    state: NetworkState,
    rmcsa: Rmcsa<'a>,
    arrivals: std::iter::Peekable<Box<dyn Iterator<Item = Request> + 'a>>,
    departures: BinaryHeap<Reverse<Pending>>,
    metrics: MetricsAccumulator,
    served: u64,
    window_start: Option<f64>,
    last_event: f64,
    cache_at_warmup: CacheStats,
}

impl<'a> Simulation<'a> {
    pub fn new(
        topology: &'a Topology,
        spectrum: &SpectrumConfig,
        traffic: &TrafficConfig,
        policy: &PolicyConfig,
        options: SimOptions,
    ) -> Result<Self, EngineError> {
        validate(topology, spectrum, traffic, policy)?;
        let generator = RequestGenerator::new(topology.node_count(), traffic);
        Self::with_requests(topology, spectrum, traffic, policy, options, generator)
    }

    /// Runs over an explicit request sequence instead of the generator.
    /// Requests must be in non-decreasing arrival order.
    pub fn with_requests(
        topology: &'a Topology,
        spectrum: &SpectrumConfig,
        traffic: &TrafficConfig,
        policy: &PolicyConfig,
        options: SimOptions,
        requests: impl IntoIterator<Item = Request> + 'a,
    ) -> Result<Self, EngineError> {
        validate(topology, spectrum, traffic, policy)?;
        let mut rmcsa = Rmcsa::new(topology, policy.clone(), options.modulation.clone());
        if !options.caching {
            rmcsa = rmcsa.without_cache();
        }
        let arrivals: Box<dyn Iterator<Item = Request> + 'a> = Box::new(requests.into_iter());
        Ok(Simulation {
            topology,
            spectrum: spectrum.clone(),
            traffic: traffic.clone(),
            state: NetworkState::new(topology.directed_link_count(), spectrum),
            rmcsa,
            arrivals: arrivals.peekable(),
            departures: BinaryHeap::new(),
            metrics: MetricsAccumulator::new(),
            served: 0,
            window_start: match options.tau_start {
                TauStart::Zero => Some(0.0),
                TauStart::WarmupEnd => None,
            },
            last_event: 0.0,
            cache_at_warmup: CacheStats::default(),
            options,
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn rmcsa(&self) -> &Rmcsa<'a> {
        &self.rmcsa
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    pub fn served(&self) -> u64 {
        self.served
    }

    /// Processes the next event, or returns `None` once arrivals run out.
    pub fn step(&mut self) -> Result<Option<Event>, EngineError> {
        let Some(next_arrival) = self.arrivals.peek().map(|r| r.t_arrival) else {
            return Ok(None);
        };
        let event = match self.departures.peek() {
            Some(Reverse(p)) if p.expiry <= next_arrival => {
                let Reverse(p) = self.departures.pop().expect("peeked");
                self.state.release(p.lightpath)?;
                self.last_event = p.expiry;
                Event::Departure {
                    lightpath: p.lightpath,
                    time: p.expiry,
                }
            }
            _ => {
                let request = self.arrivals.next().expect("peeked");
                self.arrive(request)
            }
        };
        if self.options.verify_invariants {
            self.state.check_invariants()?;
        }
        Ok(Some(event))
    }

    fn arrive(&mut self, request: Request) -> Event {
        let recorded = request.id >= self.traffic.warmup_requests as u64;
        if recorded && self.metrics.counted() == 0 {
            self.cache_at_warmup = self.rmcsa.cache_stats();
            self.window_start.get_or_insert(request.t_arrival);
        }
        self.rmcsa.maybe_refresh_lb(&self.state, self.served);
        let decision = self.rmcsa.serve(&request, &mut self.state);
        self.served += 1;
        self.last_event = request.t_arrival;
        if let Some(a) = decision.accepted() {
            self.departures.push(Reverse(Pending {
                expiry: a.allocation.expiry_time,
                lightpath: a.allocation.lightpath_id,
                recorded,
                slot_hops: a.allocation.data_slots * a.allocation.links.len(),
            }));
        }
        if recorded {
            self.metrics.record_decision(&request, &decision);
        }
        Event::Arrival {
            request,
            decision,
            recorded,
        }
    }

    /// Drains the remaining events and computes the report.
    pub fn run(mut self) -> Result<RunReport, EngineError> {
        while self.step()?.is_some() {}
        self.finish()
    }

    /// Computes the report from the events processed so far. Pending
    /// departures are discarded.
    pub fn finish(mut self) -> Result<RunReport, EngineError> {
        let end = self.last_event;
        for Reverse(p) in self.departures.drain() {
            if p.recorded {
                self.metrics.truncate_holding(p.slot_hops, p.expiry - end);
            }
        }
        let tau = end - self.window_start.unwrap_or(end);
        let metrics = self.metrics.finalize(
            self.topology,
            &self.spectrum,
            tau,
            self.options.nru_denominator,
        )?;
        let total = self.rmcsa.cache_stats();
        let cache = CacheStats {
            hits: total.hits - self.cache_at_warmup.hits,
            misses: total.misses - self.cache_at_warmup.misses,
        };
        Ok(RunReport {
            echo: RunEcho {
                topology: self.topology.name().to_string(),
                offered_load_erlangs: self.traffic.offered_load(self.topology.node_count()),
                spectrum: self.spectrum,
                traffic: self.traffic,
                policy: self.rmcsa.config().clone(),
                caching: self.options.caching,
            },
            metrics,
            cache,
            cache_total: total,
            path_computations: self.rmcsa.path_computations(),
            requests_processed: self.served,
        })
    }
}

/// Generates the request stream for `traffic` and simulates it to the end.
pub fn run_simulation(
    topology: &Topology,
    spectrum: &SpectrumConfig,
    traffic: &TrafficConfig,
    policy: &PolicyConfig,
    options: SimOptions,
) -> Result<RunReport, EngineError> {
    Simulation::new(topology, spectrum, traffic, policy, options)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NodeId;

    fn line() -> Topology {
        Topology::new("line", 3, [(0, 1, 100.0), (1, 2, 100.0), (0, 2, 500.0)]).unwrap()
    }

    fn req(id: u64, t_arrival: f64, t_hold: f64) -> Request {
        Request {
            id,
            s: NodeId(0),
            d: NodeId(2),
            bandwidth_gbps: 100.0,
            t_arrival,
            t_hold,
        }
    }

    fn traffic(warmup: usize) -> TrafficConfig {
        TrafficConfig {
            warmup_requests: warmup,
            ..Default::default()
        }
    }

    fn small_spectrum() -> SpectrumConfig {
        SpectrumConfig {
            cores: 1,
            slots_per_core: 4,
            slot_bandwidth_ghz: 12.5,
            guard_slots: 0,
        }
    }

    #[test]
    fn departures_before_arrivals_at_equal_time() {
        let t = line();
        // 100 Gb/s over 200 km is one 64QAM slot.
        let reqs = vec![req(0, 0.0, 1.0), req(1, 0.5, 0.5), req(2, 1.0, 1.0), req(3, 1.0, 1.0)];
        let mut sim = Simulation::with_requests(
            &t,
            &small_spectrum(),
            &traffic(0),
            &PolicyConfig::new(Policy::Sp),
            SimOptions { verify_invariants: true, ..Default::default() },
            reqs,
        )
        .unwrap();
        let mut kinds = Vec::new();
        while let Some(e) = sim.step().unwrap() {
            kinds.push(match e {
                Event::Arrival { decision, .. } => {
                    if decision.is_accepted() { "A" } else { "B" }
                }
                Event::Departure { .. } => "D",
            });
        }
        assert_eq!(kinds, ["A", "A", "D", "D", "A", "A"]);
    }

    #[test]
    fn warmup_and_window() {
        let t = line();
        let reqs = vec![req(0, 0.0, 10.0), req(1, 2.0, 1.0), req(2, 4.0, 10.0)];
        let report = Simulation::with_requests(
            &t,
            &small_spectrum(),
            &traffic(1),
            &PolicyConfig::new(Policy::Sp),
            SimOptions::default(),
            reqs,
        )
        .unwrap()
        .run()
        .unwrap();
        let m = &report.metrics;
        assert_eq!(m.raw.counted(), 2);
        assert_eq!(m.observation_time_s, 2.0);
        // One slot over two hops for request 1. Request 2 arrives at the
        // window end, so its holding clips to zero.
        assert_eq!(m.raw.accepted, 2);
        assert_eq!(m.raw.nru_numerator, 1.0 * 2.0 * 1.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let t = line();
        let mut p = PolicyConfig::new(Policy::Cala);
        p.k = 0;
        assert!(matches!(
            run_simulation(&t, &SpectrumConfig::default(), &traffic(0), &p, SimOptions::default()),
            Err(EngineError::Config(_))
        ));
        let mut tr = traffic(0);
        tr.mu = 0.0;
        assert!(matches!(
            run_simulation(&t, &SpectrumConfig::default(), &tr, &PolicyConfig::new(Policy::Sp), SimOptions::default()),
            Err(EngineError::Config(_))
        ));
    }

    #[test]
    fn all_warmup_has_no_window() {
        let t = line();
        let mut tr = traffic(10);
        tr.total_requests = 5;
        let r = run_simulation(&t, &SpectrumConfig::default(), &tr, &PolicyConfig::new(Policy::Sp), SimOptions::default());
        assert!(matches!(r, Err(EngineError::Metrics(MetricsError::NonPositiveTau(_)))));
    }
}
