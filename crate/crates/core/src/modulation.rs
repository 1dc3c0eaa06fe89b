//! Distance-adaptive modulation and slot-count computation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectrum::SpectrumConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationEntry {
    pub name: String,
    /// Bits per symbol.
    pub m: u32,
    /// Rate carried by one dual-polarized slot with this format.
    pub supported_rate_gbps: f64,
    /// Longest admissible path (inclusive).
    pub max_reach_km: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModulationError {
    #[error("modulation table is empty")]
    Empty,
    #[error("entry {0} has non-positive bits per symbol or reach")]
    InvalidEntry(String),
    #[error("entries must have strictly increasing m and strictly decreasing reach ({0})")]
    NotOrdered(String),
}

/// Modulation formats ordered by increasing bits per symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModulationEntry>", into = "Vec<ModulationEntry>")]
pub struct ModulationTable {
    entries: Vec<ModulationEntry>,
}

impl ModulationTable {
    pub fn new(mut entries: Vec<ModulationEntry>) -> Result<Self, ModulationError> {
        if entries.is_empty() {
            return Err(ModulationError::Empty);
        }
        entries.sort_by_key(|e| e.m);
        for e in &entries {
            if e.m == 0 || !(e.max_reach_km > 0.0) {
                return Err(ModulationError::InvalidEntry(e.name.clone()));
            }
        }
        for pair in entries.windows(2) {
            if pair[0].m == pair[1].m || pair[1].max_reach_km >= pair[0].max_reach_km {
                return Err(ModulationError::NotOrdered(pair[1].name.clone()));
            }
        }
        Ok(ModulationTable { entries })
    }

    pub fn entries(&self) -> &[ModulationEntry] {
        &self.entries
    }

    /// Longest reach of any format; longer paths are never usable.
    pub fn max_reach_km(&self) -> f64 {
        self.entries[0].max_reach_km
    }

    /// The most efficient format whose reach covers `path_length_km`.
    pub fn select(&self, path_length_km: f64) -> Option<&ModulationEntry> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.max_reach_km >= path_length_km)
    }
}

impl Default for ModulationTable {
    fn default() -> Self {
        let row = |name: &str, m: u32, rate: f64, reach: f64| ModulationEntry {
            name: name.to_string(),
            m,
            supported_rate_gbps: rate,
            max_reach_km: reach,
        };
        ModulationTable {
            entries: vec![
                row("DP-BPSK", 1, 25.0, 8000.0),
                row("DP-QPSK", 2, 50.0, 4000.0),
                row("DP-8QAM", 3, 75.0, 2000.0),
                row("DP-16QAM", 4, 100.0, 1000.0),
                row("DP-32QAM", 5, 125.0, 500.0),
                row("DP-64QAM", 6, 150.0, 250.0),
            ],
        }
    }
}

impl TryFrom<Vec<ModulationEntry>> for ModulationTable {
    type Error = ModulationError;

    fn try_from(entries: Vec<ModulationEntry>) -> Result<Self, Self::Error> {
        ModulationTable::new(entries)
    }
}

impl From<ModulationTable> for Vec<ModulationEntry> {
    fn from(t: ModulationTable) -> Self {
        t.entries
    }
}

/// Selects from the default table.
pub fn select_modulation(path_length_km: f64) -> Option<ModulationEntry> {
    ModulationTable::default().select(path_length_km).cloned()
}

/// Slots needed to carry `bandwidth_gbps` with `m` bits per symbol on a
/// dual-polarized carrier: `ceil(b / (2 * B_s * m))`.
pub fn required_slots(bandwidth_gbps: f64, m: u32, cfg: &SpectrumConfig) -> usize {
    let exact = bandwidth_gbps / (2.0 * cfg.slot_bandwidth_ghz * f64::from(m));
    // Exact multiples must not round up through float noise.
    let slots = (exact - 1e-9).ceil();
    slots.max(1.0) as usize
}
