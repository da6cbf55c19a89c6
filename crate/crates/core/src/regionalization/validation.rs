//! Cross-validated regionalization: folds, pooled RMSE, the 28 × 7 evaluation
//! and per-target permutation importance.

use log::debug;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::records::{design_matrix, target_index, CatchmentRecord, PredictorGroup};
use crate::engine::{FEATURE_NAMES, N_FEATURES};
use crate::error::{DataError, ForestError};
use crate::forest::{fit, DesignMatrix, ForestParams, ImportanceReport};

/// Independent sub-seed for stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// A seeded partition of `0..n` into `k` disjoint folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPartition {
    n: usize,
    folds: Vec<Vec<usize>>,
}

impl FoldPartition {
    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Indices outside fold `f`, ascending.
    pub fn training(&self, f: usize) -> Vec<usize> {
        let mut held = vec![false; self.n];
        for &i in &self.folds[f] {
            held[i] = true;
        }
        (0..self.n).filter(|&i| !held[i]).collect()
    }
}

/// Shuffles `0..n` and cuts it into `k` folds; the first `n % k` folds hold one extra index.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPartition, DataError> {
    if k == 0 || k > n {
        return Err(DataError::BadK { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = idx[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(FoldPartition { n, folds })
}

pub fn rmse(predicted: &[f64], observed: &[f64]) -> Result<f64, DataError> {
    if predicted.len() != observed.len() {
        return Err(DataError::LengthMismatch(predicted.len(), observed.len()));
    }
    if predicted.is_empty() {
        return Err(DataError::TooFew { needed: 1, got: 0 });
    }
    let sse: f64 = predicted.iter().zip(observed).map(|(p, o)| (p - o).powi(2)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// One out-of-fold prediction per row.
    pub predictions: Vec<f64>,
    pub observed: Vec<f64>,
    /// RMSE pooled over all rows.
    pub rmse: f64,
    pub fold_sizes: Vec<usize>,
    pub fold_mse: Vec<f64>,
}

/// k-fold cross-validation of a forest on an arbitrary design matrix.
pub fn cross_validate_design(
    data: &DesignMatrix,
    partition: &FoldPartition,
    params: &ForestParams,
    seed: u64,
) -> Result<CvResult, ForestError> {
    if partition.n() != data.n_rows() {
        return Err(ForestError::InvalidData(format!(
            "partition covers {} rows, design has {}",
            partition.n(),
            data.n_rows()
        )));
    }
    let observed = data.target().to_vec();
    let mut predictions = vec![f64::NAN; data.n_rows()];
    let mut fold_sizes = Vec::with_capacity(partition.k());
    let mut fold_mse = Vec::with_capacity(partition.k());
    for (f, held) in partition.folds().iter().enumerate() {
        let train = data.select_rows(&partition.training(f));
        let model = fit(&train, params, derive_seed(seed, f as u64))?;
        let rows: Vec<Vec<f64>> = held.iter().map(|&i| data.row(i)).collect();
        let pred = model.predict(&rows)?;
        let mut sse = 0.0;
        for (&i, p) in held.iter().zip(pred) {
            predictions[i] = p;
            sse += (p - observed[i]).powi(2);
        }
        fold_sizes.push(held.len());
        fold_mse.push(sse / held.len() as f64);
    }
    let rmse = rmse(&predictions, &observed).map_err(|e| ForestError::InvalidData(e.to_string()))?;
    Ok(CvResult {
        predictions,
        observed,
        rmse,
        fold_sizes,
        fold_mse,
    })
}

fn check_size(records: &[CatchmentRecord], k: usize) -> Result<(), DataError> {
    if k < 2 {
        return Err(DataError::BadK { n: records.len(), k });
    }
    if records.len() < 2 * k {
        return Err(DataError::TooFew {
            needed: 2 * k,
            got: records.len(),
        });
    }
    Ok(())
}

fn pair_error(target: &str, group: PredictorGroup, source: ForestError) -> DataError {
    DataError::Pair {
        target: target.to_string(),
        group: group.label().to_string(),
        source,
    }
}

/// Cross-validates one (target, group) pair on a given partition.
pub fn cross_validate_with(
    records: &[CatchmentRecord],
    target: &str,
    group: PredictorGroup,
    partition: &FoldPartition,
    params: &ForestParams,
    seed: u64,
) -> Result<CvResult, DataError> {
    let t = target_index(target)?;
    let data = design_matrix(records, group, t).map_err(|e| pair_error(target, group, e))?;
    cross_validate_design(&data, partition, params, seed).map_err(|e| pair_error(target, group, e))
}

/// Cross-validates one (target, group) pair with a fresh `k`-fold partition from `seed`.
pub fn cross_validate(
    records: &[CatchmentRecord],
    target: &str,
    group: PredictorGroup,
    k: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<CvResult, DataError> {
    check_size(records, k)?;
    let partition = kfold_split(records.len(), k, seed)?;
    cross_validate_with(records, target, group, &partition, params, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedObserved {
    pub target: String,
    pub catchment_id: String,
    pub observed: f64,
    pub predicted: f64,
}

/// RMSE, ranks and relative scores of every target against every evaluated group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub targets: Vec<String>,
    pub groups: Vec<PredictorGroup>,
    pub rmse: Vec<Vec<f64>>,
    pub ranks: Vec<Vec<usize>>,
    /// Percent RMSE improvement over the static-only group.
    pub relative_scores: Vec<Vec<f64>>,
    /// Catchment ids of each fold, shared by every (target, group) run.
    pub folds: Vec<Vec<String>>,
    pub seed: u64,
    pub n_trees: usize,
    #[serde(skip)]
    pub predicted_vs_observed: Vec<PredictedObserved>,
}

impl EvaluationReport {
    pub fn rmse_of(&self, target: &str, group: PredictorGroup) -> Option<f64> {
        let (i, j) = self.cell(target, group)?;
        Some(self.rmse[i][j])
    }

    pub fn rank_of(&self, target: &str, group: PredictorGroup) -> Option<usize> {
        let (i, j) = self.cell(target, group)?;
        Some(self.ranks[i][j])
    }

    pub fn relative_score_of(&self, target: &str, group: PredictorGroup) -> Option<f64> {
        let (i, j) = self.cell(target, group)?;
        Some(self.relative_scores[i][j])
    }

    pub fn n_scores(&self) -> usize {
        self.rmse.iter().map(Vec::len).sum()
    }

    fn cell(&self, target: &str, group: PredictorGroup) -> Option<(usize, usize)> {
        let i = self.targets.iter().position(|t| t == target)?;
        let j = self.groups.iter().position(|g| *g == group)?;
        Some((i, j))
    }
}

/// Ranks 1..=n by ascending RMSE; exact ties go to the earlier group in canonical order.
pub fn rank_groups(rmse: &[f64], groups: &[PredictorGroup]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rmse.len()).collect();
    order.sort_by(|&a, &b| rmse[a].total_cmp(&rmse[b]).then(groups[a].cmp(&groups[b])));
    let mut ranks = vec![0; rmse.len()];
    for (r, &j) in order.iter().enumerate() {
        ranks[j] = r + 1;
    }
    ranks
}

/// `100 · (rmse_static − rmse_group) / rmse_static`.
pub fn relative_score(rmse_static: f64, rmse_group: f64) -> f64 {
    100.0 * (rmse_static - rmse_group) / rmse_static
}

/// Normalizes a group selection: canonical order, no duplicates, static-only always present.
pub fn evaluation_groups(selection: &[PredictorGroup]) -> Vec<PredictorGroup> {
    let mut groups: Vec<PredictorGroup> = if selection.is_empty() {
        PredictorGroup::ALL.to_vec()
    } else {
        selection.to_vec()
    };
    groups.push(PredictorGroup::S);
    groups.sort();
    groups.dedup();
    groups
}

/// Runs every (target, group) cross-validation on one shared fold partition.
///
/// `groups` restricts the evaluated columns (empty means all seven); the
/// static-only baseline is always included. Predicted-vs-observed pairs come
/// from the S+T+P group and are empty when it is not evaluated.
pub fn evaluate_all(
    records: &[CatchmentRecord],
    groups: &[PredictorGroup],
    params: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<EvaluationReport, DataError> {
    check_size(records, k)?;
    let groups = evaluation_groups(groups);
    let partition = kfold_split(records.len(), k, seed)?;
    let jobs: Vec<(usize, PredictorGroup)> = (0..N_FEATURES)
        .flat_map(|t| groups.iter().map(move |&g| (t, g)))
        .collect();
    let results: Vec<Result<CvResult, DataError>> = jobs
        .par_iter()
        .map(|&(t, g)| {
            debug!("cross-validating {} with {}", FEATURE_NAMES[t], g);
            cross_validate_with(records, FEATURE_NAMES[t], g, &partition, params, seed)
        })
        .collect();

    let mut rmse = vec![vec![0.0; groups.len()]; N_FEATURES];
    let mut predicted_vs_observed = Vec::new();
    for (&(t, g), res) in jobs.iter().zip(results) {
        let res = res?;
        let j = groups.iter().position(|x| *x == g).expect("job group");
        rmse[t][j] = res.rmse;
        if g == PredictorGroup::STP {
            predicted_vs_observed.extend(records.iter().zip(res.observed.iter().zip(&res.predictions)).map(
                |(r, (&observed, &predicted))| PredictedObserved {
                    target: FEATURE_NAMES[t].to_string(),
                    catchment_id: r.catchment_id.clone(),
                    observed,
                    predicted,
                },
            ));
        }
    }
    let s = groups.iter().position(|g| *g == PredictorGroup::S).expect("static baseline");
    let ranks = rmse.iter().map(|row| rank_groups(row, &groups)).collect();
    let relative_scores = rmse
        .iter()
        .map(|row| row.iter().map(|&v| relative_score(row[s], v)).collect())
        .collect();
    let folds = partition
        .folds()
        .iter()
        .map(|f| f.iter().map(|&i| records[i].catchment_id.clone()).collect())
        .collect();
    Ok(EvaluationReport {
        targets: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        groups,
        rmse,
        ranks,
        relative_scores,
        folds,
        seed,
        n_trees: params.n_trees,
        predicted_vs_observed,
    })
}

/// Fits a forest on `data` and scores every predictor by permutation importance.
pub fn importance_on(data: &DesignMatrix, params: &ForestParams, seed: u64) -> Result<ImportanceReport, ForestError> {
    let model = fit(data, params, seed)?;
    model.permutation_importance(data, derive_seed(seed, u64::MAX))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetImportance {
    pub target: String,
    pub report: ImportanceReport,
}

/// Importance of all 75 predictors for one streamflow feature.
pub fn importance_for(
    records: &[CatchmentRecord],
    target: &str,
    params: &ForestParams,
    seed: u64,
) -> Result<ImportanceReport, DataError> {
    let t = target_index(target)?;
    let group = PredictorGroup::STP;
    let data = design_matrix(records, group, t).map_err(|e| pair_error(target, group, e))?;
    importance_on(&data, params, seed).map_err(|e| pair_error(target, group, e))
}

/// Importance reports for all 28 streamflow features, in canonical order.
pub fn importance_all(
    records: &[CatchmentRecord],
    params: &ForestParams,
    seed: u64,
) -> Result<Vec<TargetImportance>, DataError> {
    FEATURE_NAMES
        .par_iter()
        .map(|&target| {
            Ok(TargetImportance {
                target: target.to_string(),
                report: importance_for(records, target, params, seed)?,
            })
        })
        .collect()
}
