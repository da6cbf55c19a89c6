//! Spearman rank correlation and the predictor × target correlation matrix.

use super::records::{all_predictor_names, CatchmentRecord, PredictorGroup};
use crate::engine::{FEATURE_NAMES, N_FEATURES};
use crate::error::DataError;

/// Ranks starting at 1; tied values share the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // Positions i+1..=j share the rank (i + 1 + j) / 2.
        let r = (i + 1 + j) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = r;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, DataError> {
    if x.len() != y.len() {
        return Err(DataError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(DataError::TooFew {
            needed: 3,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(DataError::Format("spearman: non-finite input".into()));
    }
    pearson(&average_ranks(x), &average_ranks(y)).ok_or(DataError::ConstantVector)
}

/// Spearman rho of every potential predictor against every streamflow feature.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub predictors: Vec<String>,
    pub targets: Vec<String>,
    /// `rho[i][j]` for predictor `i` and target `j`; `None` where a column is constant.
    pub rho: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, predictor: &str, target: &str) -> Option<Option<f64>> {
        let i = self.predictors.iter().position(|p| p == predictor)?;
        let j = self.targets.iter().position(|t| t == target)?;
        Some(self.rho[i][j])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.predictors.len(), self.targets.len())
    }
}

pub fn correlation_matrix(records: &[CatchmentRecord]) -> Result<CorrelationMatrix, DataError> {
    if records.len() < 3 {
        return Err(DataError::TooFew {
            needed: 3,
            got: records.len(),
        });
    }
    let predictors = all_predictor_names();
    let rows: Vec<Vec<f64>> = records.iter().map(|r| PredictorGroup::STP.row(r)).collect();
    let target_ranks: Vec<Vec<f64>> = (0..N_FEATURES)
        .map(|j| average_ranks(&records.iter().map(|r| r.streamflow[j]).collect::<Vec<_>>()))
        .collect();
    let rho = (0..predictors.len())
        .map(|i| {
            let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            let ranks = average_ranks(&col);
            target_ranks.iter().map(|t| pearson(&ranks, t)).collect()
        })
        .collect();
    Ok(CorrelationMatrix {
        predictors,
        targets: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        rho,
    })
}
