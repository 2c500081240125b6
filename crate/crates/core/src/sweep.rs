//! Parameter sweeps over strategy, interval, train size and relocator count.

use serde::{Deserialize, Serialize};

use crate::domain::{DemandTrace, Seconds};
use crate::sim::{simulate, ConfigError, SimError, SimulationConfig, SimulationMetrics, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub strategies: Vec<Strategy>,
    pub intervals: Vec<Seconds>,
    pub train_sizes: Vec<u32>,
    pub relocators: Vec<u32>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            strategies: Strategy::ALL.to_vec(),
            intervals: vec![300, 900, 1800],
            train_sizes: (2..=8).collect(),
            relocators: vec![5, 10, 15, 20, 25, 30],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SweepCell {
    pub strategy: Strategy,
    pub interval: Seconds,
    pub train_size: u32,
    pub relocators: u32,
}

impl SweepCell {
    pub fn apply(&self, base: &SimulationConfig) -> SimulationConfig {
        SimulationConfig {
            strategy: self.strategy,
            interval: self.interval,
            train_size: self.train_size,
            relocators: self.relocators,
            ..base.clone()
        }
    }
}

impl SweepGrid {
    /// Cells in row-major order: strategy, interval, train size, relocators.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for &strategy in &self.strategies {
            for &interval in &self.intervals {
                for &train_size in &self.train_sizes {
                    for &relocators in &self.relocators {
                        out.push(SweepCell { strategy, interval, train_size, relocators });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub metrics: SimulationMetrics,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Cells whose configuration is invalid, e.g. stackable with no relocators.
    pub skipped: Vec<(SweepCell, String)>,
}

fn run_cell(trace: &DemandTrace, base: &SimulationConfig, cell: SweepCell) -> Result<SweepRow, (SweepCell, ConfigError)> {
    let mut cfg = cell.apply(base);
    cfg.record_events = false;
    match simulate(trace, &cfg) {
        Ok(out) => Ok(SweepRow { cell, metrics: out.metrics }),
        Err(SimError::Config(e)) => Err((cell, e)),
        Err(SimError::Invariant { time, what }) => {
            panic!("invariant violated in sweep cell {cell:?} at t={time}: {what}")
        }
    }
}

/// Runs one simulation per grid cell. Output order follows [`SweepGrid::cells`]
/// whether or not cells run in parallel.
pub fn sweep(trace: &DemandTrace, base: &SimulationConfig, grid: &SweepGrid) -> SweepResult {
    let cells = grid.cells();

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        cells.par_iter().map(|&c| run_cell(trace, base, c)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = cells.iter().map(|&c| run_cell(trace, base, c)).collect();

    let mut out = SweepResult::default();
    for r in results {
        match r {
            Ok(row) => out.rows.push(row),
            Err((cell, e)) => out.skipped.push((cell, e.to_string())),
        }
    }
    out
}
