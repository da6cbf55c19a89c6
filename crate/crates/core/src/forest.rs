//! Regression random forest with out-of-bag error and permutation importance.
//!
//! Trees are grown on bootstrap samples with exhaustive CART variance-reduction
//! splits over `mtry` randomly drawn candidate predictors per node. Every tree
//! owns a ChaCha8 stream: the generator is seeded from the master seed and its
//! stream id is set to the tree index, so tree `i` sees the same random numbers
//! whichever thread grows it. Importance passes use the importance seed with the
//! same per-tree stream scheme.

use std::io::Write;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ForestError;

/// Named predictor columns with an aligned target.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, target: Vec<f64>) -> Result<Self, ForestError> {
        if names.len() != columns.len() {
            return Err(ForestError::InvalidData(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = target.len();
        if n < 2 {
            return Err(ForestError::InvalidData(format!("need at least 2 rows, got {n}")));
        }
        let mut seen = std::collections::HashSet::new();
        for (name, col) in names.iter().zip(&columns) {
            if !seen.insert(name.as_str()) {
                return Err(ForestError::InvalidData(format!("duplicate column `{name}`")));
            }
            if col.len() != n {
                return Err(ForestError::InvalidData(format!(
                    "column `{name}` has {} rows, target has {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(ForestError::InvalidData(format!("column `{name}` has non-finite values")));
            }
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(ForestError::InvalidData("target has non-finite values".into()));
        }
        Ok(Self { names, columns, target })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|i| self.row(i)).collect()
    }

    /// Rows at `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| idx.iter().map(|&i| c[i]).collect()).collect(),
            target: idx.iter().map(|&i| self.target[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate predictors per node; `None` means max(1, floor(p / 3)).
    pub mtry: Option<usize>,
    /// Nodes smaller than twice this are not split, and no child smaller than it is created.
    pub min_node_size: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 2000,
            mtry: None,
            min_node_size: 5,
        }
    }
}

impl ForestParams {
    pub fn with_trees(n_trees: usize) -> Self {
        Self {
            n_trees,
            ..Self::default()
        }
    }

    pub fn mtry_for(&self, p: usize) -> usize {
        self.mtry.unwrap_or((p / 3).max(1)).clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    /// Number of bootstrap draws of each original row.
    inbag_counts: Vec<u32>,
    oob: Vec<usize>,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn oob_rows(&self) -> &[usize] {
        &self.oob
    }

    pub fn inbag_counts(&self) -> &[u32] {
        &self.inbag_counts
    }

    fn predict_with(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value: v, .. } => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if value(*feature) <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_with(|j| row[j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<RegressionTree>,
    params: ForestParams,
    feature_names: Vec<String>,
    seed: u64,
}

struct Grower<'a> {
    data: &'a DesignMatrix,
    mtry: usize,
    min_node: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    features: Vec<usize>,
    pairs: Vec<(f64, f64)>,
}

impl Grower<'_> {
    fn leaf(&mut self, samples: &[usize]) -> usize {
        let value = samples.iter().map(|&i| self.data.target[i]).sum::<f64>() / samples.len() as f64;
        self.nodes.push(Node::Leaf {
            value,
            size: samples.len(),
        });
        self.nodes.len() - 1
    }

    fn best_split(&mut self, samples: &[usize]) -> Option<(usize, f64, usize)> {
        let n = samples.len();
        let total: f64 = samples.iter().map(|&i| self.data.target[i]).sum();
        let parent = total * total / n as f64;
        let p = self.data.n_cols();
        let (chosen, _) = self.features.partial_shuffle(&mut self.rng, self.mtry);
        let mut candidates = chosen.to_vec();
        candidates.sort_unstable();

        let mut best: Option<(f64, usize, f64, usize)> = None;
        for &j in &candidates {
            debug_assert!(j < p);
            let col = &self.data.columns[j];
            self.pairs.clear();
            self.pairs.extend(samples.iter().map(|&i| (col[i], self.data.target[i])));
            self.pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.pairs[k].1;
                let nl = k + 1;
                let nr = n - nl;
                if nl < self.min_node || nr < self.min_node {
                    continue;
                }
                let (a, b) = (self.pairs[k].0, self.pairs[k + 1].0);
                if a == b {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64 - parent;
                if best.map_or(true, |(g, ..)| gain > g) {
                    let threshold = a + (b - a) / 2.0;
                    best = Some((gain, j, threshold, nl));
                }
            }
        }
        match best {
            Some((gain, j, t, nl)) if gain > 1e-12 * parent.abs().max(1e-300) && gain > 0.0 => Some((j, t, nl)),
            _ => None,
        }
    }

    fn grow(&mut self, samples: &mut [usize]) -> usize {
        let n = samples.len();
        let first = self.data.target[samples[0]];
        let pure = samples.iter().all(|&i| self.data.target[i] == first);
        if pure || n < 2 * self.min_node {
            return self.leaf(samples);
        }
        let Some((feature, threshold, _)) = self.best_split(samples) else {
            return self.leaf(samples);
        };
        let col = &self.data.columns[feature];
        let mut k = 0;
        for i in 0..n {
            if col[samples[i]] <= threshold {
                samples.swap(i, k);
                k += 1;
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0, size: 0 });
        let (l, r) = samples.split_at_mut(k);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

fn grow_tree(data: &DesignMatrix, mtry: usize, min_node: usize, seed: u64, index: usize) -> RegressionTree {
    let n = data.n_rows();
    let mut rng = tree_rng(seed, index);
    let mut samples: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut inbag_counts = vec![0u32; n];
    for &s in &samples {
        inbag_counts[s] += 1;
    }
    let oob = (0..n).filter(|&i| inbag_counts[i] == 0).collect();
    let mut g = Grower {
        data,
        mtry,
        min_node,
        rng,
        nodes: Vec::new(),
        features: (0..data.n_cols()).collect(),
        pairs: Vec::with_capacity(n),
    };
    g.grow(&mut samples);
    RegressionTree {
        nodes: g.nodes,
        inbag_counts,
        oob,
    }
}

/// Grows `params.n_trees` trees; the result depends only on (data, params, seed).
pub fn fit(data: &DesignMatrix, params: &ForestParams, seed: u64) -> Result<ForestModel, ForestError> {
    if data.n_cols() == 0 {
        return Err(ForestError::EmptyPredictors);
    }
    if params.n_trees == 0 {
        return Err(ForestError::InvalidParameter("n_trees must be >= 1".into()));
    }
    if params.min_node_size == 0 {
        return Err(ForestError::InvalidParameter("min_node_size must be >= 1".into()));
    }
    if data.n_rows() < 2 * params.min_node_size {
        return Err(ForestError::InvalidData(format!(
            "{} rows is fewer than twice the minimum node size {}",
            data.n_rows(),
            params.min_node_size
        )));
    }
    let first = data.target[0];
    if data.target.iter().all(|&v| v == first) {
        return Err(ForestError::DegenerateTarget);
    }
    let mtry = params.mtry_for(data.n_cols());
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(data, mtry, params.min_node_size, seed, t))
        .collect();
    Ok(ForestModel {
        trees,
        params: params.clone(),
        feature_names: data.names.clone(),
        seed,
    })
}

/// Per-predictor importance scores and their ranking (1 = most important).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub names: Vec<String>,
    pub scores: Vec<f64>,
    pub ranks: Vec<usize>,
}

impl ImportanceReport {
    pub fn new(names: Vec<String>, scores: Vec<f64>) -> Self {
        let ranks = rank_descending(&names, &scores);
        Self { names, scores, ranks }
    }

    pub fn score_of(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.scores[i])
    }

    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name).map(|i| self.ranks[i])
    }
}

/// Ranks by descending score; equal scores are ordered by name.
pub fn rank_descending(names: &[String], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| names[a].cmp(&names[b])));
    let mut ranks = vec![0; scores.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

impl ForestModel {
    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_width(&self, width: usize) -> Result<(), ForestError> {
        if width != self.feature_names.len() {
            return Err(ForestError::ColumnMismatch {
                expected: self.feature_names.len(),
                got: width,
            });
        }
        Ok(())
    }

    /// Mean of the per-tree predictions for each row.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ForestError> {
        for r in rows {
            self.check_width(r.len())?;
        }
        Ok(rows
            .par_iter()
            .map(|r| self.trees.iter().map(|t| t.predict_row(r)).sum::<f64>() / self.trees.len() as f64)
            .collect())
    }

    /// Predicts the rows of a design matrix whose columns must match the training columns.
    pub fn predict_matrix(&self, data: &DesignMatrix) -> Result<Vec<f64>, ForestError> {
        self.check_width(data.n_cols())?;
        if data.names != self.feature_names {
            return Err(ForestError::InvalidData("column names differ from training columns".into()));
        }
        self.predict(&data.rows())
    }

    /// Out-of-bag ensemble predictions; `None` for rows that are in-bag in every tree.
    pub fn oob_predictions(&self, data: &DesignMatrix) -> Result<Vec<Option<f64>>, ForestError> {
        self.check_width(data.n_cols())?;
        let n = data.n_rows();
        let rows = data.rows();
        let per_tree: Vec<Vec<(usize, f64)>> = self
            .trees
            .par_iter()
            .map(|t| t.oob.iter().filter(|&&i| i < n).map(|&i| (i, t.predict_row(&rows[i]))).collect())
            .collect();
        let mut sum = vec![0.0; n];
        let mut cnt = vec![0usize; n];
        for preds in &per_tree {
            for &(i, p) in preds {
                sum[i] += p;
                cnt[i] += 1;
            }
        }
        Ok(sum
            .iter()
            .zip(&cnt)
            .map(|(s, &c)| (c > 0).then(|| s / c as f64))
            .collect())
    }

    /// Mean square error of out-of-bag ensemble predictions.
    pub fn oob_error(&self, data: &DesignMatrix) -> Result<f64, ForestError> {
        let preds = self.oob_predictions(data)?;
        let mut sse = 0.0;
        let mut m = 0usize;
        let mut skipped = 0usize;
        for (p, y) in preds.iter().zip(&data.target) {
            match p {
                Some(p) => {
                    sse += (p - y) * (p - y);
                    m += 1;
                }
                None => skipped += 1,
            }
        }
        if m == 0 {
            return Err(ForestError::NoOobCoverage);
        }
        if skipped > 0 {
            warn!("{skipped} rows have no out-of-bag trees and were skipped");
        }
        Ok(sse / m as f64)
    }

    /// Unnormalized permutation importance: for every tree, the increase of its
    /// out-of-bag MSE when one predictor is shuffled among its out-of-bag rows,
    /// averaged over trees.
    pub fn permutation_importance(&self, data: &DesignMatrix, seed: u64) -> Result<ImportanceReport, ForestError> {
        self.check_width(data.n_cols())?;
        let p = data.n_cols();
        let rows = data.rows();
        let y = &data.target;
        let per_tree: Vec<Option<Vec<f64>>> = self
            .trees
            .par_iter()
            .enumerate()
            .map(|(t, tree)| {
                let oob = &tree.oob;
                if oob.is_empty() {
                    return None;
                }
                let m = oob.len() as f64;
                let base: f64 = oob
                    .iter()
                    .map(|&i| (tree.predict_row(&rows[i]) - y[i]).powi(2))
                    .sum::<f64>()
                    / m;
                let mut rng = tree_rng(seed, t);
                let mut shuffled = Vec::with_capacity(oob.len());
                let deltas = (0..p)
                    .map(|j| {
                        shuffled.clear();
                        shuffled.extend(oob.iter().map(|&i| rows[i][j]));
                        shuffled.shuffle(&mut rng);
                        let permuted: f64 = oob
                            .iter()
                            .zip(&shuffled)
                            .map(|(&i, &v)| {
                                let row = &rows[i];
                                let pred = tree.predict_with(|k| if k == j { v } else { row[k] });
                                (pred - y[i]).powi(2)
                            })
                            .sum::<f64>()
                            / m;
                        permuted - base
                    })
                    .collect();
                Some(deltas)
            })
            .collect();
        let mut scores = vec![0.0; p];
        let mut used = 0usize;
        for deltas in per_tree.iter().flatten() {
            for (s, d) in scores.iter_mut().zip(deltas) {
                *s += d;
            }
            used += 1;
        }
        if used == 0 {
            return Err(ForestError::NoOobCoverage);
        }
        scores.iter_mut().for_each(|s| *s /= used as f64);
        Ok(ImportanceReport::new(self.feature_names.clone(), scores))
    }

    /// Debug dump of every tree as JSON; not a stable format.
    pub fn dump<W: Write>(&self, w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(std::io::Error::other)
    }
}
