use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::lb::LbWeightSnapshot;
use crate::modulation::{required_slots, ModulationTable};
use crate::routing::{
    congested_link, shortest_path_by, CacheStats, ExclusionSet, Path, PathFinder, Router,
};
use crate::spectrum::{Allocation, NetworkState};
use crate::topology::{LinkId, Topology};
use crate::traffic::Request;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Policy {
    #[serde(rename = "SP")]
    Sp,
    #[serde(rename = "KSP")]
    Ksp,
    #[serde(rename = "KDP")]
    Kdp,
    #[serde(rename = "LB")]
    Lb,
    #[serde(rename = "CALA")]
    Cala,
}

impl Policy {
    pub const ALL: [Policy; 5] = [Policy::Sp, Policy::Ksp, Policy::Kdp, Policy::Lb, Policy::Cala];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Sp => "SP",
            Policy::Ksp => "KSP",
            Policy::Kdp => "KDP",
            Policy::Lb => "LB",
            Policy::Cala => "CALA",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown policy {s:?} (expected SP, KSP, KDP, LB or CALA)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub policy: Policy,
    /// Candidate paths for KSP, KDP and CALA.
    pub k: usize,
    pub lb_alpha: f64,
    /// LB weights are refreshed every this many served requests.
    pub lb_update_interval: u64,
}

impl PolicyConfig {
    pub fn new(policy: Policy) -> Self {
        PolicyConfig {
            policy,
            k: 3,
            lb_alpha: 0.5,
            lb_update_interval: 1500,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Accepted {
    pub allocation: Allocation,
    /// 1-based index of the candidate path that was used.
    pub candidate_index: usize,
    pub modulation_m: u32,
    pub path_length_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Outcome {
    Accepted(Box<Accepted>),
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub outcome: Outcome,
    /// Wall-clock time spent finding route, modulation, core and slots.
    pub service_latency: Duration,
}

impl Decision {
    pub fn is_accepted(&self) -> bool {
        matches!(self.outcome, Outcome::Accepted(_))
    }

    pub fn accepted(&self) -> Option<&Accepted> {
        match &self.outcome {
            Outcome::Accepted(a) => Some(a),
            Outcome::Blocked => None,
        }
    }
}

/// Resources found for a request, before they are reserved.
#[derive(Debug, Clone)]
struct Plan {
    path: Arc<Path>,
    candidate_index: usize,
    core: usize,
    start_slot: usize,
    data_slots: usize,
    modulation_m: u32,
}

/// Per-candidate diagnostics for the most recent request, in the order
/// candidates were evaluated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateTrace {
    pub paths: Vec<Arc<Path>>,
    /// Congested links excluded while building the candidates.
    pub excluded_lmax: Vec<LinkId>,
}

/// Routing, modulation, core and spectrum assignment for one run.
#[derive(Debug)]
pub struct Rmcsa<'a> {
    topology: &'a Topology,
    modulation: ModulationTable,
    config: PolicyConfig,
    router: Router<'a>,
    lb: Option<LbWeightSnapshot>,
    lb_searches: u64,
    trace: Option<CandidateTrace>,
}

impl<'a> Rmcsa<'a> {
    pub fn new(topology: &'a Topology, config: PolicyConfig, modulation: ModulationTable) -> Self {
        Rmcsa {
            topology,
            modulation,
            config,
            router: Router::new(topology, true),
            lb: None,
            lb_searches: 0,
            trace: None,
        }
    }

    /// Turns the path cache off; every lookup recomputes.
    pub fn without_cache(mut self) -> Self {
        self.router = Router::new(self.topology, false);
        self
    }

    /// Records the candidate paths of each request (for inspection).
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(CandidateTrace::default());
        self
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn cache_stats(&self) -> CacheStats {
        self.router.stats()
    }

    /// Shortest-path searches executed, including uncached LB searches.
    pub fn path_computations(&self) -> u64 {
        self.router.computations() + self.lb_searches
    }

    pub fn last_trace(&self) -> Option<&CandidateTrace> {
        self.trace.as_ref()
    }

    pub fn lb_snapshot(&self) -> Option<&LbWeightSnapshot> {
        self.lb.as_ref()
    }

    /// Recomputes LB weights from the current state.
    pub fn refresh_lb(&mut self, state: &NetworkState, request_count: u64) {
        self.lb = Some(LbWeightSnapshot::compute(
            self.topology,
            state,
            self.config.lb_alpha,
            request_count,
        ));
    }

    /// Refreshes LB weights when `served` is a multiple of the update interval.
    pub fn maybe_refresh_lb(&mut self, state: &NetworkState, served: u64) {
        if self.config.policy == Policy::Lb
            && (self.lb.is_none() || served % self.config.lb_update_interval.max(1) == 0)
        {
            self.refresh_lb(state, served);
        }
    }

    /// Serves a request with the configured policy and reserves the chosen
    /// resources until `t_arrival + t_hold`.
    pub fn serve(&mut self, req: &Request, state: &mut NetworkState) -> Decision {
        match self.config.policy {
            Policy::Sp => self.serve_sp(req, state),
            Policy::Ksp => self.serve_ksp(req, state),
            Policy::Kdp => self.serve_kdp(req, state),
            Policy::Lb => self.serve_lb(req, state),
            Policy::Cala => self.serve_cala(req, state),
        }
    }

    pub fn serve_sp(&mut self, req: &Request, state: &mut NetworkState) -> Decision {
        self.timed(req, state, |this, req, state| {
            let path = this.router.shortest(req.s, req.d, &ExclusionSet::new())?;
            this.note(&path);
            this.try_path(state, req, path, 1)
        })
    }

    pub fn serve_ksp(&mut self, req: &Request, state: &mut NetworkState) -> Decision {
        self.timed(req, state, |this, req, state| {
            let paths = this.router.k_shortest(req.s, req.d, this.config.k);
            paths.iter().enumerate().find_map(|(i, p)| {
                this.note(p);
                this.try_path(state, req, p.clone(), i + 1)
            })
        })
    }

    pub fn serve_kdp(&mut self, req: &Request, state: &mut NetworkState) -> Decision {
        self.timed(req, state, |this, req, state| {
            let mut excluded = ExclusionSet::new();
            for k in 1..=this.config.k {
                let path = this.router.shortest(req.s, req.d, &excluded)?;
                this.note(&path);
                if let Some(plan) = this.try_path(state, req, path.clone(), k) {
                    return Some(plan);
                }
                excluded.extend(path.links().iter().copied());
            }
            None
        })
    }

    pub fn serve_lb(&mut self, req: &Request, state: &mut NetworkState) -> Decision {
        if self.lb.is_none() {
            self.refresh_lb(state, 0);
        }
        self.timed(req, state, |this, req, state| {
            let snapshot = this.lb.as_ref().expect("snapshot initialized");
            this.lb_searches += 1;
            let path = shortest_path_by(this.topology, req.s, req.d, &ExclusionSet::new(), |dl| {
                snapshot.weight(dl)
            })?;
            let path = Arc::new(path);
            this.note(&path);
            this.try_path(state, req, path, 1)
        })
    }

    /// Congestion-aware candidates: the shortest path, then alternatives
    /// that avoid the most occupied link of every failed candidate so far,
    /// and finally a path link-disjoint from the first one.
    pub fn serve_cala(&mut self, req: &Request, state: &mut NetworkState) -> Decision {
        self.timed(req, state, |this, req, state| {
            let k_max = this.config.k;
            let first = this.router.shortest(req.s, req.d, &ExclusionSet::new())?;
            this.note(&first);
            if let Some(plan) = this.try_path(state, req, first.clone(), 1) {
                return Some(plan);
            }
            let mut lmax: Vec<LinkId> = Vec::with_capacity(k_max);
            let mut prev = Some(first.clone());
            for k in 2..=k_max {
                if let Some(p) = &prev {
                    let l = congested_link(state, p);
                    lmax.push(l);
                    this.note_lmax(l);
                }
                let excluded: ExclusionSet = if k < k_max {
                    lmax.iter().copied().collect()
                } else {
                    first.links().iter().chain(&lmax).copied().collect()
                };
                let candidate = this.router.shortest(req.s, req.d, &excluded);
                if let Some(p) = &candidate {
                    this.note(p);
                    if let Some(plan) = this.try_path(state, req, p.clone(), k) {
                        return Some(plan);
                    }
                }
                prev = candidate;
            }
            None
        })
    }

    fn note(&mut self, path: &Arc<Path>) {
        if let Some(trace) = &mut self.trace {
            trace.paths.push(path.clone());
        }
    }

    fn note_lmax(&mut self, link: LinkId) {
        if let Some(trace) = &mut self.trace {
            trace.excluded_lmax.push(link);
        }
    }

    /// Modulation by path length, slot count, then first-fit over cores.
    fn try_path(
        &self,
        state: &mut NetworkState,
        req: &Request,
        path: Arc<Path>,
        candidate_index: usize,
    ) -> Option<Plan> {
        let modulation = self.modulation.select(path.length_km())?;
        let data_slots = required_slots(req.bandwidth_gbps, modulation.m, state.config());
        let (core, start_slot) = state.find_first_fit_any_core(path.directed_links(), data_slots)?;
        Some(Plan {
            path,
            candidate_index,
            core,
            start_slot,
            data_slots,
            modulation_m: modulation.m,
        })
    }

    fn timed(
        &mut self,
        req: &Request,
        state: &mut NetworkState,
        find: impl FnOnce(&mut Self, &Request, &mut NetworkState) -> Option<Plan>,
    ) -> Decision {
        if let Some(trace) = &mut self.trace {
            *trace = CandidateTrace::default();
        }
        let started = Instant::now();
        let plan = find(self, req, state);
        let service_latency = started.elapsed();
        let outcome = match plan {
            None => Outcome::Blocked,
            Some(plan) => {
                let allocation = state
                    .allocate(
                        plan.path.directed_links(),
                        plan.core,
                        plan.start_slot,
                        plan.data_slots,
                        req.t_arrival + req.t_hold,
                    )
                    .expect("first-fit window must be free");
                Outcome::Accepted(Box::new(Accepted {
                    allocation,
                    candidate_index: plan.candidate_index,
                    modulation_m: plan.modulation_m,
                    path_length_km: plan.path.length_km(),
                }))
            }
        };
        Decision {
            outcome,
            service_latency,
        }
    }
}
