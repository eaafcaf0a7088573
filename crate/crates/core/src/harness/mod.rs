//! Experiment configuration, deterministic Monte Carlo execution, and
//! CSV reporting.
//!
//! Determinism contract: every replication draws from its own stream,
//! seeded by a documented mix of `(master_seed, cell ordinal, rep
//! ordinal)`, and results are aggregated in replication order with
//! compensated summation. Output is therefore byte-identical for any
//! worker count. Because the cell ordinal enters the seed, duplicate
//! cells in one config produce distinct (equally distributed) rows.

mod builtin;
mod csv;
mod run;

pub use builtin::{builtin_grid, builtin_neg_rho_cells, builtin_nonneg_rho_cells, reproduce_tables};
pub use csv::{format_sig6, write_csv, write_csv_path, write_discrepancy_csv_path};
pub use run::{derive_rep_seed, run_cell, run_grid, CellResult, MethodOutcome, MethodStats};

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::thresholds::ThresholdMethod;

fn default_reps() -> usize {
    1000
}

fn default_grid_points() -> usize {
    1000
}

/// One experiment cell: a parameter point, the methods to compare, and
/// the replication budget.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentCell {
    pub params: ModelParams,
    pub methods: Vec<ThresholdMethod>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_grid_points")]
    pub oracle_grid_points: usize,
}

impl ExperimentCell {
    pub fn new(params: ModelParams, methods: Vec<ThresholdMethod>) -> Self {
        ExperimentCell {
            params,
            methods,
            reps: default_reps(),
            oracle_grid_points: default_grid_points(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("cell has an empty methods list".into()));
        }
        for m in &self.methods {
            m.validate()?;
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.oracle_grid_points < 2 {
            return Err(Error::Config("oracle_grid_points must be >= 2".into()));
        }
        Ok(())
    }
}

/// Aggregated results for a whole grid, one row per cell in
/// declaration order.
#[derive(Debug, Clone)]
pub struct ExperimentTable {
    pub rows: Vec<(ExperimentCell, CellResult)>,
}

/// Parse a config: a JSON array of cells. Unknown keys are rejected.
pub fn parse_config(json: &str) -> Result<Vec<ExperimentCell>> {
    let cells: Vec<ExperimentCell> =
        serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
    if cells.is_empty() {
        return Err(Error::Config("config has no cells".into()));
    }
    for (i, cell) in cells.iter().enumerate() {
        cell.validate()
            .map_err(|e| Error::Config(format!("cell {i}: {e}")))?;
    }
    Ok(cells)
}

pub fn load_config(path: &Path) -> Result<Vec<ExperimentCell>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
