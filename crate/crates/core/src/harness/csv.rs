//! CSV emission. All numeric fields are printed with 6 significant
//! digits; missing values are empty fields.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{ExperimentCell, ExperimentTable};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "m,beta,sigma0_sq,tau_sq,rho,method,mean_total_error,mean_fp,mean_fn,se_total_error,discrepancy_pct";

/// 6 significant digits, plain decimal notation.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

fn cell_prefix(cell: &ExperimentCell) -> String {
    let p = &cell.params;
    // The beta column is empty when sparsity was given as explicit p.
    let beta = p.beta.map(format_sig6).unwrap_or_default();
    format!(
        "{},{},{},{},{}",
        p.m,
        beta,
        format_sig6(p.sigma0_sq),
        format_sig6(p.tau_sq),
        format_sig6(p.rho)
    )
}

/// Write the error table: one row per (cell, method) plus an `ideal`
/// row per cell. Newline-terminated UTF-8.
pub fn write_csv<W: Write>(table: &ExperimentTable, mut out: W) -> Result<()> {
    let mut text = String::new();
    text.push_str(CSV_HEADER);
    text.push('\n');
    for (cell, result) in &table.rows {
        let prefix = cell_prefix(cell);
        for outcome in &result.methods {
            let _ = write!(text, "{prefix},{},", outcome.name);
            match &outcome.stats {
                Some(s) => {
                    let _ = write!(
                        text,
                        "{},{},{},{},",
                        format_sig6(s.mean_total_error),
                        format_sig6(s.mean_fp),
                        format_sig6(s.mean_fn),
                        format_sig6(s.se_total_error)
                    );
                    if let Some(d) = outcome.discrepancy_vs(&result.ideal) {
                        let _ = write!(text, "{}", format_sig6(d));
                    }
                }
                None => text.push_str(",,,,"),
            }
            text.push('\n');
        }
        let ideal = &result.ideal;
        let _ = writeln!(
            text,
            "{prefix},ideal,{},{},{},{},",
            format_sig6(ideal.mean_total_error),
            format_sig6(ideal.mean_fp),
            format_sig6(ideal.mean_fn),
            format_sig6(ideal.se_total_error)
        );
    }
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: "<writer>".into(),
        source,
    })
}

pub fn write_csv_path(table: &ExperimentTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(table, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Companion table holding only the recomputed discrepancy column.
pub fn write_discrepancy_csv_path(table: &ExperimentTable, path: &Path) -> Result<()> {
    let mut text = String::new();
    text.push_str("m,beta,sigma0_sq,tau_sq,rho,method,discrepancy_pct\n");
    for (cell, result) in &table.rows {
        let prefix = cell_prefix(cell);
        for outcome in &result.methods {
            let d = outcome
                .discrepancy_vs(&result.ideal)
                .map(format_sig6)
                .unwrap_or_default();
            let _ = writeln!(text, "{prefix},{},{d}", outcome.name);
        }
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
