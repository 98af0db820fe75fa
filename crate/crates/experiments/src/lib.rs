//! Experiment runner for the `adacomb` library.
//!
//! An experiment is described by a flat TOML file ([`config`]); [`run`]
//! executes it and returns CSV tables. The `adacomb` binary wraps this in a
//! command-line interface.

pub mod config;
pub mod experiments;
pub mod graphs;
pub mod presets;
pub mod table;

pub use config::{parse, ExperimentConfig, ExperimentId, Params};
pub use experiments::{run, Output};
pub use table::{Cell, Table};

use std::path::{Path, PathBuf};

/// Write every output into `dir`, creating it if needed. Returns the paths.
pub fn write_outputs(outputs: &[Output], dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    outputs
        .iter()
        .map(|o| {
            let path = dir.join(&o.name);
            o.table.write(&path)?;
            Ok(path)
        })
        .collect()
}
