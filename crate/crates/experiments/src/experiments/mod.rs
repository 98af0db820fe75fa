//! Experiment implementations. Each module pairs a parameter struct with a
//! `run` function returning structured results that convert to CSV tables.

pub mod convergence;
pub mod echo;
pub mod lowcost;
pub mod robustness;
pub mod sparse;
pub mod steady;
pub mod theory_tables;
pub mod tracking;
pub mod transfer;

use adacomb::scenario::{EnsembleConfig, EnsembleMetrics};

use crate::config::{ExperimentConfig, Params};
use crate::table::Table;

/// One CSV file produced by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// File name, including the `.csv` extension.
    pub name: String,
    pub table: Table,
}

impl Output {
    fn new(stem: &str, suffix: &str, table: Table) -> Self {
        Output { name: format!("{stem}{suffix}.csv"), table }
    }
}

/// Run the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Output>> {
    cfg.validate()?;
    let stem = cfg.stem();
    let (runs, seed) = (cfg.runs, cfg.seed);
    Ok(match &cfg.params {
        Params::Steady(p) => steady::run(p, runs, seed)?.outputs(stem),
        Params::Tracking(p) => tracking::run(p)?.outputs(stem),
        Params::Convergence(p) => convergence::run(p, runs, seed)?.outputs(stem),
        Params::Robustness(p) => robustness::run(p, runs, seed)?.outputs(stem),
        Params::Transfer(p) => transfer::run(p, runs, seed)?.outputs(stem),
        Params::Lowcost(p) => lowcost::run(p, runs, seed)?.outputs(stem),
        Params::Sparse(p) => sparse::run(p, runs, seed)?.outputs(stem),
        Params::Echo(p) => echo::run(p, runs, seed)?.outputs(stem),
        Params::TheoryTables(p) => theory_tables::run(p, runs, seed)?.outputs(stem),
    })
}

pub(crate) fn ensemble(runs: usize, horizon: usize, seed: u64, stride: usize, tail: usize) -> EnsembleConfig {
    EnsembleConfig::new(runs, horizon, seed).with_stride(stride).with_steady_tail(tail)
}

/// Series of a channel converted to dB.
pub(crate) fn series_db(m: &EnsembleMetrics, channel: &str) -> Vec<f64> {
    m.series(channel).unwrap_or_else(|| panic!("missing channel {channel}")).iter().map(|v| adacomb::db(*v)).collect()
}

pub(crate) fn series(m: &EnsembleMetrics, channel: &str) -> Vec<f64> {
    m.series(channel).unwrap_or_else(|| panic!("missing channel {channel}")).to_vec()
}

/// Steady-window mean of a channel.
pub(crate) fn steady(m: &EnsembleMetrics, channel: &str) -> f64 {
    m.steady(channel).unwrap_or_else(|| panic!("missing channel {channel}"))
}
