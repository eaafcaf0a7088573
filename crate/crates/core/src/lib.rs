//! Threshold selection for detecting high-variance coordinates in
//! equicorrelated Gaussian observations.
//!
//! The model: each of `m` coordinates is independently a "signal"
//! (variance `sigma0_sq + tau_sq`) with probability `p` or a "null"
//! (variance `sigma0_sq`), and the coordinates share a common
//! equicorrelation `rho`. A procedure picks a cut `C` and classifies
//! coordinate `i` as a signal when `|y_i| > C`.
//!
//! The crate provides:
//!
//! - [`normal`]: standard normal CDF/quantile/tail primitives and the
//!   Mills-ratio tail bracket;
//! - [`model`]: the generative sampler (exact for the full admissible
//!   `rho` range) plus exact and approximate risk of a fixed cut and
//!   the closed-form near-optimal cut;
//! - [`thresholds`]: the data-driven cut rules (power means `T1`, `T2`,
//!   `T3`, a two-group mean-split iteration, top-k variants) and the
//!   parameter-only rules;
//! - [`scoring`]: selection, confusion counts, loss, and the
//!   discrepancy-versus-ideal metric;
//! - [`oracle`]: truth-using ideal-cut baselines and the two-group
//!   clustering criteria;
//! - [`harness`]: deterministic parallel Monte Carlo over parameter
//!   grids with CSV reporting.

pub mod error;
pub mod harness;
pub mod model;
pub mod normal;
pub mod oracle;
pub mod scoring;
pub mod thresholds;

pub use error::{Error, Result};
pub use harness::{
    builtin_grid, reproduce_tables, run_cell, run_grid, write_csv, write_csv_path, CellResult,
    ExperimentCell, ExperimentTable, MethodOutcome, MethodStats,
};
pub use model::{
    approx_risk, determined_threshold, draw_observations, draw_signals, exact_risk, ApproxRisk,
    ModelParams, RiskBreakdown, SignalVector, TrialSample,
};
pub use normal::{
    abs_normal_tail, mills_bounds, squared_normal_cdf, std_normal_cdf, std_normal_pdf,
    std_normal_quantile, Probability, TailBounds,
};
pub use oracle::{
    between_group_gap, ideal_threshold_exact, ideal_threshold_grid, within_group_var, OracleResult,
};
pub use scoring::{confusion, discrepancy_pct, loss, select, ConfusionCounts, Selection};
pub use thresholds::{
    compute_threshold, expected_k, iterative_threshold, poisson_normal_k, power_mean_threshold,
    top_k_threshold, IterativeTrace, ThresholdMethod,
};
