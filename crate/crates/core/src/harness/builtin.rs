//! The built-in benchmark grid and the `reproduce-tables` pipeline.
//!
//! The grid crosses m in {80, 180}, beta in {0.3, 0.7}, sigma0_sq in
//! {1, 3}, tau_sq in {15, 90} with nonnegative rho in {0, 0.1, 0.7},
//! plus one near-degenerate negative rho per m (-0.00633 for m = 80,
//! -0.00279 for m = 180). Grid values are mapped directly onto the
//! variance parameters sigma0_sq and tau_sq; this single constant
//! choice is calibrated by the determined-rule cross-check emitted in
//! `determined_analytic.csv`.

use std::fmt::Write as _;
use std::path::Path;

use super::csv::{format_sig6, write_csv_path, write_discrepancy_csv_path};
use super::run::run_grid;
use super::{ExperimentCell, ExperimentTable};
use crate::error::{Error, Result};
use crate::model::{determined_threshold, exact_risk, ModelParams};
use crate::thresholds::ThresholdMethod;

const M_VALUES: [usize; 2] = [80, 180];
const BETA_VALUES: [f64; 2] = [0.3, 0.7];
const SIGMA0_SQ_VALUES: [f64; 2] = [1.0, 3.0];
const TAU_SQ_VALUES: [f64; 2] = [15.0, 90.0];
const NONNEG_RHO: [f64; 3] = [0.0, 0.1, 0.7];

fn neg_rho_for(m: usize) -> f64 {
    match m {
        80 => -0.00633,
        180 => -0.00279,
        _ => unreachable!("no negative-rho cell defined for m={m}"),
    }
}

fn standard_methods() -> Vec<ThresholdMethod> {
    vec![
        ThresholdMethod::t1(),
        ThresholdMethod::t2(),
        ThresholdMethod::t3(),
        ThresholdMethod::iterative_default(),
        ThresholdMethod::Determined,
    ]
}

fn cell(m: usize, beta: f64, sigma0_sq: f64, tau_sq: f64, rho: f64, reps: usize) -> ExperimentCell {
    let params = ModelParams::with_beta(m, beta, sigma0_sq, tau_sq, rho)
        .expect("built-in grid parameters are valid");
    let mut cell = ExperimentCell::new(params, standard_methods());
    cell.reps = reps;
    cell
}

/// The 48 nonnegative-rho cells, in report row order.
pub fn builtin_nonneg_rho_cells(reps: usize) -> Vec<ExperimentCell> {
    let mut cells = Vec::new();
    for m in M_VALUES {
        for beta in BETA_VALUES {
            for sigma0_sq in SIGMA0_SQ_VALUES {
                for tau_sq in TAU_SQ_VALUES {
                    for rho in NONNEG_RHO {
                        cells.push(cell(m, beta, sigma0_sq, tau_sq, rho, reps));
                    }
                }
            }
        }
    }
    cells
}

/// The 16 negative-rho cells.
pub fn builtin_neg_rho_cells(reps: usize) -> Vec<ExperimentCell> {
    let mut cells = Vec::new();
    for m in M_VALUES {
        for beta in BETA_VALUES {
            for sigma0_sq in SIGMA0_SQ_VALUES {
                for tau_sq in TAU_SQ_VALUES {
                    cells.push(cell(m, beta, sigma0_sq, tau_sq, neg_rho_for(m), reps));
                }
            }
        }
    }
    cells
}

/// All 64 built-in cells: nonnegative rho first, then negative rho.
pub fn builtin_grid(reps: usize) -> Vec<ExperimentCell> {
    let mut cells = builtin_nonneg_rho_cells(reps);
    cells.extend(builtin_neg_rho_cells(reps));
    cells
}

fn write_analytic_csv(cells: &[ExperimentCell], table: &ExperimentTable, path: &Path) -> Result<()> {
    let mut text =
        String::from("m,beta,sigma0_sq,tau_sq,rho,determined_c,analytic_risk,simulated_mean\n");
    for (cell, (_, result)) in cells.iter().zip(&table.rows) {
        let p = &cell.params;
        let (c, risk) = match determined_threshold(p) {
            Ok(c) => (format_sig6(c), format_sig6(exact_risk(p, c)?.risk)),
            Err(_) => (String::new(), String::new()),
        };
        let simulated = result
            .methods
            .iter()
            .find(|m| m.name == "determined")
            .and_then(|m| m.stats.as_ref())
            .map(|s| format_sig6(s.mean_total_error))
            .unwrap_or_default();
        let _ = writeln!(
            text,
            "{},{},{},{},{},{c},{risk},{simulated}",
            p.m,
            p.beta.map(format_sig6).unwrap_or_default(),
            format_sig6(p.sigma0_sq),
            format_sig6(p.tau_sq),
            format_sig6(p.rho)
        );
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Run the built-in grid and write five CSVs into `out_dir`:
/// per-cell error tables and discrepancy tables for each rho sign, and
/// the analytic cross-check of the determined rule.
pub fn reproduce_tables(out_dir: &Path, master_seed: u64, reps: usize, workers: usize) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let cells = builtin_grid(reps);
    let table = run_grid(&cells, master_seed, workers)?;
    let n_nonneg = builtin_nonneg_rho_cells(reps).len();
    let (nonneg_rows, neg_rows) = {
        let mut rows = table.rows;
        let neg = rows.split_off(n_nonneg);
        (rows, neg)
    };
    let nonneg = ExperimentTable { rows: nonneg_rows };
    let neg = ExperimentTable { rows: neg_rows };

    write_csv_path(&nonneg, &out_dir.join("errors_nonneg_rho.csv"))?;
    write_csv_path(&neg, &out_dir.join("errors_neg_rho.csv"))?;
    write_discrepancy_csv_path(&nonneg, &out_dir.join("discrepancy_nonneg_rho.csv"))?;
    write_discrepancy_csv_path(&neg, &out_dir.join("discrepancy_neg_rho.csv"))?;

    let all_cells = builtin_grid(reps);
    let full = ExperimentTable {
        rows: nonneg.rows.into_iter().chain(neg.rows).collect(),
    };
    write_analytic_csv(&all_cells, &full, &out_dir.join("determined_analytic.csv"))?;
    Ok(())
}
