//! Truth-using baselines and the two-group clustering criteria.
//!
//! The "ideal" cut is found per realization with knowledge of the true
//! indicator vector; it is a lower-bound comparator, not a usable
//! procedure. Two routes are provided: a grid scan over the magnitude
//! range (the route used by the experiment harness) and an exhaustive
//! enumeration of all strict-cut partitions (the exact reference the
//! grid is tested against).

use crate::error::{Error, Result};
use crate::model::SignalVector;
use crate::scoring::{confusion, select};

/// Outcome of an ideal-cut search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    /// First scanned cut attaining the minimum.
    pub c_ideal: f64,
    /// Minimal `fp + fn` over the scanned cuts.
    pub min_total_error: usize,
    /// Number of scanned cuts attaining the minimum.
    pub n_optima: usize,
}

/// Scan `grid_points` equally spaced cuts over `[min |y|, max |y|]`
/// and return the first one minimizing `fp + fn` against `nu`.
///
/// The scan is a single sweep over the sorted magnitudes (O(m log m +
/// grid_points)); each grid cut classifies by the strict rule
/// `|y_i| > C` exactly as [`select`] does.
pub fn ideal_threshold_grid(
    y: &[f64],
    nu: &SignalVector,
    grid_points: usize,
) -> Result<OracleResult> {
    if y.is_empty() {
        return Err(Error::EmptyInput("ideal_threshold_grid"));
    }
    if nu.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: nu.len(),
        });
    }
    if grid_points < 2 {
        return Err(Error::invalid("grid_points", "must be >= 2"));
    }
    // Magnitudes sorted ascending, carrying their signal flag; the
    // prefix count of signals gives fn at any cut in O(1).
    let mut order: Vec<(f64, bool)> = y
        .iter()
        .map(|v| v.abs())
        .zip(nu.bits.iter().copied())
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("magnitudes are not NaN"));
    let m = order.len();
    let total_signals = order.iter().filter(|&&(_, s)| s).count();
    let mut signals_below = vec![0usize; m + 1];
    for (i, &(_, s)) in order.iter().enumerate() {
        signals_below[i + 1] = signals_below[i] + usize::from(s);
    }
    let lo = order[0].0;
    let hi = order[m - 1].0;
    let step = (hi - lo) / (grid_points as f64 - 1.0);

    let mut best = OracleResult {
        c_ideal: lo,
        min_total_error: usize::MAX,
        n_optima: 0,
    };
    // `below` = number of magnitudes <= current cut; advances
    // monotonically with the grid sweep.
    let mut below = 0usize;
    for g in 0..grid_points {
        let c = if g + 1 == grid_points { hi } else { lo + g as f64 * step };
        while below < m && order[below].0 <= c {
            below += 1;
        }
        let fn_count = signals_below[below];
        let fp_count = (m - below) - (total_signals - fn_count);
        let err = fn_count + fp_count;
        if err < best.min_total_error {
            best = OracleResult {
                c_ideal: c,
                min_total_error: err,
                n_optima: 1,
            };
        } else if err == best.min_total_error {
            best.n_optima += 1;
        }
    }
    Ok(best)
}

/// Global minimum of `fp + fn` over all real cuts.
///
/// Only `m + 1` selections are reachable by a strict cut: one
/// representative cut per achievable partition is evaluated, including
/// the select-everything cut just below the smallest magnitude.
/// Deliberately routed through [`select`]/[`confusion`] so it shares
/// no machinery with the grid sweep it cross-checks.
pub fn ideal_threshold_exact(y: &[f64], nu: &SignalVector) -> Result<OracleResult> {
    if y.is_empty() {
        return Err(Error::EmptyInput("ideal_threshold_exact"));
    }
    if nu.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: nu.len(),
        });
    }
    let mut magnitudes: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|a, b| a.partial_cmp(b).expect("magnitudes are not NaN"));
    let mut cuts = Vec::with_capacity(magnitudes.len() + 1);
    if magnitudes[0] > 0.0 {
        cuts.push(magnitudes[0].next_down());
    }
    for w in magnitudes.windows(2) {
        if w[0] < w[1] {
            cuts.push(w[0]);
        }
    }
    cuts.push(*magnitudes.last().expect("nonempty"));

    let mut best: Option<OracleResult> = None;
    for c in cuts {
        let conf = confusion(&select(y, c)?, nu)?;
        let err = conf.total_error();
        match &mut best {
            Some(b) if err < b.min_total_error => {
                *b = OracleResult {
                    c_ideal: c,
                    min_total_error: err,
                    n_optima: 1,
                };
            }
            Some(b) if err == b.min_total_error => b.n_optima += 1,
            Some(_) => {}
            None => {
                best = Some(OracleResult {
                    c_ideal: c,
                    min_total_error: err,
                    n_optima: 1,
                })
            }
        }
    }
    Ok(best.expect("at least one cut evaluated"))
}

/// Ascending copy; fixed accumulation order keeps the clustering
/// criteria exactly permutation invariant.
fn sorted_copy(z: &[f64]) -> Vec<f64> {
    let mut v = z.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("values are not NaN"));
    v
}

/// Weighted gap between the two group means of a positive sample split
/// at `C`: `(m1 * m2 / m^2) * |mean(z <= C) - mean(z > C)|`.
pub fn between_group_gap(z: &[f64], c: f64) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptyInput("between_group_gap"));
    }
    let sorted = sorted_copy(z);
    let split = sorted.partition_point(|&v| v <= c);
    let (lo_n, hi_n) = (split, sorted.len() - split);
    if lo_n == 0 || hi_n == 0 {
        return Err(Error::invalid(
            "C",
            format!("cut {c} leaves a group empty; both groups must be nonempty"),
        ));
    }
    let lo_mean = sorted[..split].iter().sum::<f64>() / lo_n as f64;
    let hi_mean = sorted[split..].iter().sum::<f64>() / hi_n as f64;
    let m = z.len() as f64;
    let weight = (lo_n as f64) * (hi_n as f64) / (m * m);
    Ok(weight * (lo_mean - hi_mean).abs())
}

/// Sum of squared deviations from each group's own mean after
/// splitting at `C`; an empty group contributes 0.
pub fn within_group_var(z: &[f64], c: f64) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptyInput("within_group_var"));
    }
    let sorted = sorted_copy(z);
    let split = sorted.partition_point(|&v| v <= c);
    let mut total = 0.0;
    for group in [&sorted[..split], &sorted[split..]] {
        if group.is_empty() {
            continue;
        }
        let mean = group.iter().sum::<f64>() / group.len() as f64;
        total += group.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    }
    Ok(total)
}
