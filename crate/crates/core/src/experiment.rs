//! Policy × load × repetition sweeps driven by a TOML file.
//!
//! ```toml
//! topology = "../topologies/german.toml"   # relative to this file
//! policies = ["SP", "KSP", "KDP", "LB", "CALA"]
//! loads = [140, 160, 180]
//! repetitions = 10
//! seed = 1
//! output = "results/german"
//!
//! [traffic]
//! total_requests = 100000
//! warmup_requests = 10000
//! ```
//!
//! Every cell gets a seed derived from `(seed, load, repetition)` only, so
//! all policies see the same request streams at a given load and
//! repetition.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_simulation, EngineError, Policy, PolicyConfig, RunReport, SimOptions};
use crate::metrics::{mean_ci, MetricSummary};
use crate::spectrum::SpectrumConfig;
use crate::topology::{Topology, TopologyError};
use crate::traffic::TrafficConfig;

/// Column order of the summary table. Part of the output contract.
pub const SUMMARY_HEADER: [&str; 13] = [
    "policy",
    "load_erlangs",
    "rbp_mean",
    "rbp_ci",
    "bbp_mean",
    "bbp_ci",
    "nru_mean",
    "nru_ci",
    "asl_us_mean",
    "asl_us_ci",
    "ahl_mean",
    "ahl_ci",
    "cache_hit_rate",
];

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RUNS_FILE: &str = "runs.jsonl";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("invalid experiment file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("invalid experiment:\n{}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("cell {cell}: {source}")]
    Run { cell: Cell, source: EngineError },
    #[error("cannot write results: {0}")]
    Io(#[from] io::Error),
    #[error("cannot write summary: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot serialize run record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad cell selector {0:?} (expected POLICY:LOAD:REP, e.g. CALA:200:0)")]
    CellSelector(String),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Traffic settings shared by every cell. The arrival rate comes from the
/// cell's load and the seed from the cell's coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSpec {
    pub mu: f64,
    pub bandwidth_set: Vec<f64>,
    pub total_requests: usize,
    pub warmup_requests: usize,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        let t = TrafficConfig::default();
        TrafficSpec {
            mu: t.mu,
            bandwidth_set: t.bandwidth_set,
            total_requests: t.total_requests,
            warmup_requests: t.warmup_requests,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Topology file; relative paths resolve against the config file.
    pub topology: PathBuf,
    pub policies: Vec<Policy>,
    /// Offered loads in Erlangs.
    pub loads: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub confidence: f64,
    pub k: usize,
    pub lb_alpha: f64,
    pub lb_update_interval: u64,
    pub spectrum: SpectrumConfig,
    pub traffic: TrafficSpec,
    pub options: SimOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = PolicyConfig::new(Policy::Sp);
        ExperimentConfig {
            topology: PathBuf::new(),
            policies: Policy::ALL.to_vec(),
            loads: Vec::new(),
            repetitions: 10,
            seed: 1,
            output: PathBuf::from("results"),
            confidence: 0.99,
            k: p.k,
            lb_alpha: p.lb_alpha,
            lb_update_interval: p.lb_update_interval,
            spectrum: SpectrumConfig::default(),
            traffic: TrafficSpec::default(),
            options: SimOptions::default(),
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(toml::from_str(s)?)
    }
}

impl ExperimentConfig {
    /// Reads a config file and resolves the topology path against it.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: ExperimentConfig = text.parse()?;
        if cfg.topology.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.topology = dir.join(&cfg.topology);
            }
        }
        Ok(cfg)
    }

    pub fn policy_config(&self, policy: Policy) -> PolicyConfig {
        PolicyConfig {
            policy,
            k: self.k,
            lb_alpha: self.lb_alpha,
            lb_update_interval: self.lb_update_interval,
        }
    }

    pub fn traffic_config(&self, nodes: usize, load: f64, seed: u64) -> TrafficConfig {
        TrafficConfig {
            lambda_per_node: 0.0,
            mu: self.traffic.mu,
            bandwidth_set: self.traffic.bandwidth_set.clone(),
            total_requests: self.traffic.total_requests,
            warmup_requests: self.traffic.warmup_requests,
            seed,
        }
        .with_load(load, nodes)
    }

    /// All cells, ordered by policy, load, repetition.
    pub fn cells(&self) -> Vec<Cell> {
        let mut policies = self.policies.clone();
        policies.sort();
        policies.dedup();
        let mut loads = self.loads.clone();
        loads.sort_by(f64::total_cmp);
        loads.dedup();
        let mut cells = Vec::new();
        for &policy in &policies {
            for &load in &loads {
                for rep in 0..self.repetitions {
                    cells.push(Cell { policy, load, rep });
                }
            }
        }
        cells
    }

    pub fn cell_seed(&self, load: f64, rep: usize) -> u64 {
        cell_seed(self.seed, load, rep)
    }
}

/// Seed for one `(load, repetition)` stream; independent of the policy.
pub fn cell_seed(base: u64, load: f64, rep: usize) -> u64 {
    splitmix64(base ^ splitmix64(load.to_bits())).wrapping_add(rep as u64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Every problem found in the config. Errors block a run; warnings do not.
pub fn validate_config(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if cfg.topology.as_os_str().is_empty() {
        out.push(Diagnostic::error("no topology file given"));
    } else if !cfg.topology.is_file() {
        out.push(Diagnostic::error(format!(
            "topology file {} does not exist",
            cfg.topology.display()
        )));
    }
    if cfg.policies.is_empty() {
        out.push(Diagnostic::error("no policies selected"));
    }
    if cfg.loads.is_empty() {
        out.push(Diagnostic::error("no loads given"));
    }
    for &load in &cfg.loads {
        if !(load > 0.0 && load.is_finite()) {
            out.push(Diagnostic::error(format!("load must be positive, got {load}")));
        }
    }
    if cfg.repetitions == 0 {
        out.push(Diagnostic::error("repetitions must be at least 1"));
    } else if cfg.repetitions == 1 {
        out.push(Diagnostic::warning("one repetition: confidence intervals will be empty"));
    }
    if cfg.confidence != 0.99 && cfg.confidence != 0.95 {
        out.push(Diagnostic::error(format!(
            "confidence must be 0.99 or 0.95, got {}",
            cfg.confidence
        )));
    }
    if cfg.k == 0 {
        out.push(Diagnostic::error("k must be at least 1"));
    } else if cfg.k == 1 && cfg.policies.contains(&Policy::Cala) {
        out.push(Diagnostic::warning("k = 1 with CALA behaves exactly like SP"));
    }
    if !(0.0..=1.0).contains(&cfg.lb_alpha) {
        out.push(Diagnostic::error(format!("lb_alpha must lie in [0, 1], got {}", cfg.lb_alpha)));
    }
    if cfg.lb_update_interval == 0 {
        out.push(Diagnostic::error("lb_update_interval must be at least 1"));
    }
    let s = &cfg.spectrum;
    if s.cores == 0 || s.slots_per_core == 0 || !(s.slot_bandwidth_ghz > 0.0) {
        out.push(Diagnostic::error("spectrum needs cores, slots and a positive slot width"));
    }
    let t = &cfg.traffic;
    if !(t.mu > 0.0 && t.mu.is_finite()) {
        out.push(Diagnostic::error(format!("mu must be positive, got {}", t.mu)));
    }
    if t.bandwidth_set.is_empty() || t.bandwidth_set.iter().any(|&b| !(b > 0.0)) {
        out.push(Diagnostic::error("bandwidth_set must be non-empty and positive"));
    }
    if t.warmup_requests >= t.total_requests {
        out.push(Diagnostic::error(format!(
            "warmup_requests ({}) must be below total_requests ({})",
            t.warmup_requests, t.total_requests
        )));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub policy: Policy,
    pub load: f64,
    pub rep: usize,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.policy, self.load, self.rep)
    }
}

impl FromStr for Cell {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExperimentError::CellSelector(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let [policy, load, rep] = parts[..] else {
            return Err(bad());
        };
        Ok(Cell {
            policy: policy.parse().map_err(|_| bad())?,
            load: load.parse().map_err(|_| bad())?,
            rep: rep.parse().map_err(|_| bad())?,
        })
    }
}

/// One line of the per-run detail file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub policy: Policy,
    pub load_erlangs: f64,
    pub rep: usize,
    pub seed: u64,
    pub report: RunReport,
}

/// One line of the summary table. Confidence columns are empty when there
/// are fewer than two repetitions; ASL and AHL columns are empty when no
/// run accepted anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub policy: Policy,
    pub load_erlangs: f64,
    pub rbp_mean: f64,
    pub rbp_ci: Option<f64>,
    pub bbp_mean: f64,
    pub bbp_ci: Option<f64>,
    pub nru_mean: f64,
    pub nru_ci: Option<f64>,
    pub asl_us_mean: Option<f64>,
    pub asl_us_ci: Option<f64>,
    pub ahl_mean: Option<f64>,
    pub ahl_ci: Option<f64>,
    pub cache_hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub summary: Vec<SummaryRow>,
    pub runs: Vec<RunRecord>,
}

impl ExperimentResults {
    pub fn row(&self, policy: Policy, load: f64) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.policy == policy && r.load_erlangs == load)
    }
}

pub fn run_cell(
    cfg: &ExperimentConfig,
    topology: &Topology,
    cell: Cell,
) -> Result<RunRecord, ExperimentError> {
    let seed = cfg.cell_seed(cell.load, cell.rep);
    let traffic = cfg.traffic_config(topology.node_count(), cell.load, seed);
    let report = run_simulation(
        topology,
        &cfg.spectrum,
        &traffic,
        &cfg.policy_config(cell.policy),
        cfg.options.clone(),
    )
    .map_err(|source| ExperimentError::Run { cell, source })?;
    log::debug!("finished {cell}: rbp {:.5}", report.metrics.rbp);
    Ok(RunRecord {
        policy: cell.policy,
        load_erlangs: cell.load,
        rep: cell.rep,
        seed,
        report,
    })
}

fn check(cfg: &ExperimentConfig) -> Result<Topology, ExperimentError> {
    let diagnostics = validate_config(cfg);
    for d in diagnostics.iter().filter(|d| d.severity == Severity::Warning) {
        log::warn!("{}", d.message);
    }
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(ExperimentError::Invalid(diagnostics));
    }
    Ok(Topology::from_file(&cfg.topology)?)
}

/// Runs every cell on up to `workers` threads (all cores when `None`).
/// Records come back in cell order regardless of scheduling.
pub fn run_cells(
    cfg: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<Vec<RunRecord>, ExperimentError> {
    let topology = check(cfg)?;
    let cells = cfg.cells();
    log::info!(
        "{} cells on {} ({} nodes, {} links)",
        cells.len(),
        topology.name(),
        topology.node_count(),
        topology.link_count()
    );
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().expect("thread pool");
    pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| run_cell(cfg, &topology, cell))
            .collect()
    })
}

/// Runs a single cell, for debugging.
pub fn run_single(cfg: &ExperimentConfig, cell: Cell) -> Result<RunRecord, ExperimentError> {
    let topology = check(cfg)?;
    run_cell(cfg, &topology, cell)
}

/// Groups records by `(policy, load)` in the order they appear.
pub fn summarize(records: &[RunRecord], confidence: f64) -> Vec<SummaryRow> {
    let mut groups: Vec<Vec<&RunRecord>> = Vec::new();
    for r in records {
        match groups.last_mut() {
            Some(g) if g[0].policy == r.policy && g[0].load_erlangs == r.load_erlangs => g.push(r),
            _ => groups.push(vec![r]),
        }
    }
    groups.iter().map(|g| summary_row(g, confidence)).collect()
}

fn summary_row(group: &[&RunRecord], confidence: f64) -> SummaryRow {
    let stat = |values: Vec<f64>| -> (Option<f64>, Option<f64>) {
        if values.is_empty() {
            return (None, None);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let ci = mean_ci(&values, confidence).ok().map(|s: MetricSummary| s.half_width);
        (Some(mean), ci)
    };
    let collect = |f: &dyn Fn(&RunReport) -> Option<f64>| {
        group.iter().filter_map(|r| f(&r.report)).collect::<Vec<_>>()
    };
    let (rbp, rbp_ci) = stat(collect(&|r| Some(r.metrics.rbp)));
    let (bbp, bbp_ci) = stat(collect(&|r| Some(r.metrics.bbp)));
    let (nru, nru_ci) = stat(collect(&|r| Some(r.metrics.nru)));
    let (asl, asl_ci) = stat(collect(&|r| r.metrics.asl_s.map(|s| s * 1e6)));
    let (ahl, ahl_ci) = stat(collect(&|r| r.metrics.ahl));
    let (hit, _) = stat(collect(&|r| Some(r.cache_hit_rate())));
    SummaryRow {
        policy: group[0].policy,
        load_erlangs: group[0].load_erlangs,
        rbp_mean: rbp.unwrap_or_default(),
        rbp_ci,
        bbp_mean: bbp.unwrap_or_default(),
        bbp_ci,
        nru_mean: nru.unwrap_or_default(),
        nru_ci,
        asl_us_mean: asl,
        asl_us_ci: asl_ci,
        ahl_mean: ahl,
        ahl_ci,
        cache_hit_rate: hit.unwrap_or_default(),
    }
}

pub fn write_summary(out: impl Write, rows: &[SummaryRow]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    // Written explicitly so an empty table still carries the header.
    w.write_record(SUMMARY_HEADER)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.policy.name().to_string(),
            r.load_erlangs.to_string(),
            r.rbp_mean.to_string(),
            opt(r.rbp_ci),
            r.bbp_mean.to_string(),
            opt(r.bbp_ci),
            r.nru_mean.to_string(),
            opt(r.nru_ci),
            opt(r.asl_us_mean),
            opt(r.asl_us_ci),
            opt(r.ahl_mean),
            opt(r.ahl_ci),
            r.cache_hit_rate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_runs(mut out: impl Write, records: &[RunRecord]) -> Result<(), ExperimentError> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Runs the sweep and writes `summary.csv` and `runs.jsonl` into the
/// output directory.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<ExperimentResults, ExperimentError> {
    let runs = run_cells(cfg, workers)?;
    let summary = summarize(&runs, cfg.confidence);
    fs::create_dir_all(&cfg.output)?;
    write_summary(BufWriter::new(File::create(cfg.output.join(SUMMARY_FILE))?), &summary)?;
    write_runs(BufWriter::new(File::create(cfg.output.join(RUNS_FILE))?), &runs)?;
    log::info!("wrote {} rows to {}", summary.len(), cfg.output.display());
    Ok(ExperimentResults { summary, runs })
}
