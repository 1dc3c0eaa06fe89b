//! Blocking, utilization, latency and hop-count metrics, and Student-t
//! confidence intervals over repetitions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Decision, Outcome, RunReport};
use crate::spectrum::SpectrumConfig;
use crate::topology::Topology;
use crate::traffic::Request;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("observation time must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("need at least two repetitions to aggregate, got {0}")]
    TooFewRuns(usize),
    #[error("unsupported confidence level {0} (use 0.95 or 0.99)")]
    Confidence(f64),
}

/// Which link count scales the utilization denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NruDenominator {
    /// Two spectrum states per undirected link.
    #[default]
    Directed,
    Undirected,
}

/// Start of the observation window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauStart {
    /// Arrival time of the first recorded request.
    #[default]
    WarmupEnd,
    Zero,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsAccumulator {
    pub accepted: u64,
    pub blocked: u64,
    pub bw_blocked_gbps: f64,
    pub bw_total_gbps: f64,
    /// Σ data slots · hops · holding time over accepted requests.
    pub nru_numerator: f64,
    pub latency_sum_s: f64,
    pub hops_sum: u64,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_decision(&mut self, req: &Request, decision: &Decision) {
        self.bw_total_gbps += req.bandwidth_gbps;
        match &decision.outcome {
            Outcome::Blocked => {
                self.blocked += 1;
                self.bw_blocked_gbps += req.bandwidth_gbps;
            }
            Outcome::Accepted(a) => {
                self.accepted += 1;
                let hops = a.allocation.links.len();
                self.nru_numerator += (a.allocation.data_slots * hops) as f64 * req.t_hold;
                self.latency_sum_s += decision.service_latency.as_secs_f64();
                self.hops_sum += hops as u64;
            }
        }
    }

    /// Removes the part of an accepted lightpath's holding time that falls
    /// after the observation window.
    pub fn truncate_holding(&mut self, slot_hops: usize, excess_s: f64) {
        if excess_s > 0.0 {
            self.nru_numerator -= slot_hops as f64 * excess_s;
        }
    }

    pub fn counted(&self) -> u64 {
        self.accepted + self.blocked
    }

    pub fn finalize(
        &self,
        topology: &Topology,
        spectrum: &SpectrumConfig,
        tau_s: f64,
        convention: NruDenominator,
    ) -> Result<RunMetrics, MetricsError> {
        if !(tau_s > 0.0) {
            return Err(MetricsError::NonPositiveTau(tau_s));
        }
        let links = match convention {
            NruDenominator::Directed => topology.directed_link_count(),
            NruDenominator::Undirected => topology.link_count(),
        };
        let nru_denominator = (links * spectrum.cores * spectrum.slots_per_core) as f64 * tau_s;
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        let per_accepted = |x: f64| (self.accepted > 0).then(|| x / self.accepted as f64);
        Ok(RunMetrics {
            rbp: ratio(self.blocked as f64, self.counted() as f64),
            bbp: ratio(self.bw_blocked_gbps, self.bw_total_gbps),
            nru: ratio(self.nru_numerator, nru_denominator),
            asl_s: per_accepted(self.latency_sum_s),
            ahl: per_accepted(self.hops_sum as f64),
            observation_time_s: tau_s,
            nru_denominator,
            raw: self.clone(),
        })
    }
}

/// The five ratios for one run plus the raw tallies behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rbp: f64,
    pub bbp: f64,
    pub nru: f64,
    /// Mean service latency in seconds; absent when nothing was accepted.
    pub asl_s: Option<f64>,
    pub ahl: Option<f64>,
    pub observation_time_s: f64,
    pub nru_denominator: f64,
    pub raw: MetricsAccumulator,
}

/// Mean and confidence half-width of one metric over repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl MetricSummary {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub runs: usize,
    pub rbp: MetricSummary,
    pub bbp: MetricSummary,
    pub nru: MetricSummary,
    pub asl_s: Option<MetricSummary>,
    pub ahl: Option<MetricSummary>,
    pub cache_hit_rate: f64,
}

// Two-sided Student-t critical values, degrees of freedom 1..=30.
const T_99: [f64; 30] = [
    63.6567, 9.9248, 5.8409, 4.6041, 4.0321, 3.7074, 3.4995, 3.3554, 3.2498, 3.1693, 3.1058,
    3.0545, 3.0123, 2.9768, 2.9467, 2.9208, 2.8982, 2.8784, 2.8609, 2.8453, 2.8314, 2.8188,
    2.8073, 2.7969, 2.7874, 2.7787, 2.7707, 2.7633, 2.7564, 2.7500,
];
const T_95: [f64; 30] = [
    12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281, 2.2010,
    2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860, 2.0796, 2.0739,
    2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423,
];

/// Two-sided critical value. Beyond 30 degrees of freedom the normal
/// quantile is used.
pub fn t_critical(confidence: f64, dof: usize) -> Result<f64, MetricsError> {
    let (table, z) = if (confidence - 0.99).abs() < 1e-12 {
        (&T_99, 2.5758)
    } else if (confidence - 0.95).abs() < 1e-12 {
        (&T_95, 1.9600)
    } else {
        return Err(MetricsError::Confidence(confidence));
    };
    match dof {
        0 => Err(MetricsError::TooFewRuns(1)),
        1..=30 => Ok(table[dof - 1]),
        _ => Ok(z),
    }
}

/// Sample mean and `t · s / sqrt(n)` half-width.
pub fn mean_ci(values: &[f64], confidence: f64) -> Result<MetricSummary, MetricsError> {
    let n = values.len();
    if n < 2 {
        return Err(MetricsError::TooFewRuns(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half_width = t_critical(confidence, n - 1)? * var.sqrt() / (n as f64).sqrt();
    Ok(MetricSummary { mean, half_width, n })
}

fn optional_ci(values: Vec<Option<f64>>, confidence: f64) -> Option<MetricSummary> {
    let present: Vec<f64> = values.into_iter().flatten().collect();
    mean_ci(&present, confidence).ok()
}

pub fn aggregate(runs: &[RunReport], confidence: f64) -> Result<AggregateReport, MetricsError> {
    if runs.len() < 2 {
        return Err(MetricsError::TooFewRuns(runs.len()));
    }
    let pick = |f: fn(&RunMetrics) -> f64| runs.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>();
    Ok(AggregateReport {
        runs: runs.len(),
        rbp: mean_ci(&pick(|m| m.rbp), confidence)?,
        bbp: mean_ci(&pick(|m| m.bbp), confidence)?,
        nru: mean_ci(&pick(|m| m.nru), confidence)?,
        asl_s: optional_ci(runs.iter().map(|r| r.metrics.asl_s).collect(), confidence),
        ahl: optional_ci(runs.iter().map(|r| r.metrics.ahl).collect(), confidence),
        cache_hit_rate: runs.iter().map(RunReport::cache_hit_rate).sum::<f64>() / runs.len() as f64,
    })
}
