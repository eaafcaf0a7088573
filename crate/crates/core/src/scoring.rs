//! Selection, confusion bookkeeping, loss, and the discrepancy metric.
//!
//! One tie rule everywhere: a coordinate is selected iff `|y_i| > C`
//! strictly.

use crate::error::{Error, Result};
use crate::model::SignalVector;

/// The set of selected coordinates, kept as a mask over `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub mask: Vec<bool>,
}

impl Selection {
    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// Classification tallies for one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_pos: usize,
    pub true_neg: usize,
}

impl ConfusionCounts {
    /// `fp + fn`, the headline simulation metric.
    pub fn total_error(&self) -> usize {
        self.false_pos + self.false_neg
    }

    pub fn m(&self) -> usize {
        self.false_pos + self.false_neg + self.true_pos + self.true_neg
    }
}

/// `{i : |y_i| > C}`.
pub fn select(y: &[f64], c: f64) -> Result<Selection> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::invalid("C", format!("{c} must be finite and >= 0")));
    }
    Ok(Selection {
        mask: y.iter().map(|v| v.abs() > c).collect(),
    })
}

pub fn confusion(sel: &Selection, nu: &SignalVector) -> Result<ConfusionCounts> {
    if sel.len() != nu.len() {
        return Err(Error::LengthMismatch {
            left: sel.len(),
            right: nu.len(),
        });
    }
    let mut counts = ConfusionCounts {
        false_pos: 0,
        false_neg: 0,
        true_pos: 0,
        true_neg: 0,
    };
    for (&selected, &signal) in sel.mask.iter().zip(&nu.bits) {
        match (selected, signal) {
            (true, true) => counts.true_pos += 1,
            (true, false) => counts.false_pos += 1,
            (false, true) => counts.false_neg += 1,
            (false, false) => counts.true_neg += 1,
        }
    }
    Ok(counts)
}

/// Weighted misclassification loss `delta0 * fp + deltaA * fn`.
pub fn loss(conf: &ConfusionCounts, delta0: f64, delta_a: f64) -> f64 {
    delta0 * conf.false_pos as f64 + delta_a * conf.false_neg as f64
}

/// Percentage by which a method's error exceeds the ideal error:
/// `100 * (e_method - e_ideal) / e_method`.
///
/// ```
/// let d = equicorr_core::scoring::discrepancy_pct(11.053, 9.473).unwrap();
/// assert!((d - 14.295).abs() < 0.001);
/// ```
pub fn discrepancy_pct(e_method: f64, e_ideal: f64) -> Result<f64> {
    if !e_method.is_finite() || e_method <= 0.0 {
        return Err(Error::invalid(
            "e_method",
            format!("{e_method} must be > 0"),
        ));
    }
    if !e_ideal.is_finite() || e_ideal < 0.0 {
        return Err(Error::invalid("e_ideal", format!("{e_ideal} must be >= 0")));
    }
    Ok(100.0 * (e_method - e_ideal) / e_method)
}
