//! Distribution of each feature over catchments.

use serde::{Deserialize, Serialize};

use super::records::CatchmentRecord;
use crate::engine::FEATURE_NAMES;
use crate::series::{mean, VariableKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub variable: VariableKind,
    pub feature: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Quantile by linear interpolation between order statistics (`h = (n−1)p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One row per (variable, feature): 3 × 28 rows in canonical order.
pub fn feature_summary(records: &[CatchmentRecord]) -> Vec<FeatureSummary> {
    if records.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(3 * FEATURE_NAMES.len());
    for kind in VariableKind::ALL {
        for (j, name) in FEATURE_NAMES.iter().enumerate() {
            let mut col: Vec<f64> = records.iter().map(|r| r.features(kind)[j]).collect();
            col.sort_by(f64::total_cmp);
            out.push(FeatureSummary {
                variable: kind,
                feature: name.to_string(),
                min: col[0],
                q1: quantile_sorted(&col, 0.25),
                median: quantile_sorted(&col, 0.5),
                q3: quantile_sorted(&col, 0.75),
                max: col[col.len() - 1],
                mean: mean(&col),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_of_small_samples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&x, 0.5), 2.5);
        assert_eq!(quantile_sorted(&x, 0.25), 1.75);
        assert_eq!(quantile_sorted(&x, 1.0), 4.0);
        assert_eq!(quantile_sorted(&[7.0], 0.75), 7.0);
    }
}
