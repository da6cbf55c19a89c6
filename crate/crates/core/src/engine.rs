//! Full 28-feature extraction for single series and batches of catchment series.

use std::fmt;
use std::io::{Read, Write};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependence::{acf_feature_set, pacf_feature_set, spectral_entropy, FIRSTZERO_MAX_LAG};
use crate::distributional::{crossing_points, flat_spots, nonlinearity, std1st_der, tiled_stats};
use crate::error::{DataError, FeatureError};
use crate::series::{TimeSeries, VariableKind};
use crate::stl::{stl_decompose, stl_feature_set, StlConfig};

pub const N_FEATURES: usize = 28;

/// Canonical feature order; every feature matrix uses these columns.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "x_acf1",
    "x_acf10",
    "diff1_acf1",
    "diff1_acf10",
    "diff2_acf1",
    "diff2_acf10",
    "seas_acf1",
    "firstzero_ac",
    "x_pacf5",
    "diff1x_pacf5",
    "diff2x_pacf5",
    "seas_pacf",
    "std1st_der",
    "crossing_points",
    "entropy",
    "flat_spots",
    "lumpiness",
    "stability",
    "nonlinearity",
    "trend",
    "spike",
    "linearity",
    "curvature",
    "e_acf1",
    "e_acf10",
    "seasonal_strength",
    "peak",
    "trough",
];

const INTEGER_FEATURES: [&str; 5] = ["firstzero_ac", "crossing_points", "flat_spots", "peak", "trough"];

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// The 28 feature values of one series in canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector([f64; N_FEATURES]);

impl FeatureVector {
    /// Builds a vector from raw values, checking finiteness and integrality of count features.
    pub fn from_values(values: [f64; N_FEATURES]) -> Result<Self, String> {
        for (name, v) in FEATURE_NAMES.iter().zip(values) {
            if !v.is_finite() {
                return Err(format!("feature {name} is not finite ({v})"));
            }
            if INTEGER_FEATURES.contains(name) && (v.fract() != 0.0 || v < 0.0) {
                return Err(format!("feature {name} must be a nonnegative integer, got {v}"));
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64; N_FEATURES] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.0[i])
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Estimator settings shared by every extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub firstzero_max_lag: usize,
    /// Modified Daniell spans for the periodogram; empty means raw periodogram.
    pub entropy_spans: Vec<usize>,
    /// Window width for lumpiness/stability; `None` uses the series period.
    pub tile_width: Option<usize>,
    pub stl: StlConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            firstzero_max_lag: FIRSTZERO_MAX_LAG,
            entropy_spans: vec![3, 3],
            tile_width: None,
            stl: StlConfig::default(),
        }
    }
}

pub fn extract_features(series: &TimeSeries, config: &FeatureConfig) -> Result<FeatureVector, FeatureError> {
    let series = series.clone().validate()?;
    let x = series.standardize()?;

    let tag = |name: &'static str| move |e: FeatureError| e.in_feature(name);
    let a = acf_feature_set(&x, config.firstzero_max_lag).map_err(tag("x_acf1"))?;
    let p = pacf_feature_set(&x).map_err(tag("x_pacf5"))?;
    let d1 = std1st_der(&x).map_err(tag("std1st_der"))?;
    let cp = crossing_points(x.values()).map_err(tag("crossing_points"))?;
    let h = spectral_entropy(&x, &config.entropy_spans).map_err(tag("entropy"))?;
    let fs = flat_spots(x.values()).map_err(tag("flat_spots"))?;
    let t = tiled_stats(&x, config.tile_width.unwrap_or(x.period())).map_err(tag("lumpiness"))?;
    let nl = nonlinearity(x.values()).map_err(tag("nonlinearity"))?;
    let decomposition = stl_decompose(&x, &config.stl).map_err(tag("trend"))?;
    let s = stl_feature_set(&decomposition, &config.stl).map_err(tag("trend"))?;

    FeatureVector::from_values([
        a.x_acf1,
        a.x_acf10,
        a.diff1_acf1,
        a.diff1_acf10,
        a.diff2_acf1,
        a.diff2_acf10,
        a.seas_acf1,
        a.firstzero_ac as f64,
        p.x_pacf5,
        p.diff1x_pacf5,
        p.diff2x_pacf5,
        p.seas_pacf,
        d1,
        cp as f64,
        h,
        fs as f64,
        t.lumpiness,
        t.stability,
        nl,
        s.trend_strength,
        s.spike,
        s.linearity,
        s.curvature,
        s.e_acf1,
        s.e_acf10,
        s.seasonal_strength,
        s.peak as f64,
        s.trough as f64,
    ])
    .map_err(FeatureError::InvalidParameter)
}

/// What to do with series whose extraction fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailurePolicy {
    /// Any failure fails the batch.
    Strict,
    /// Failing series are dropped and reported.
    #[default]
    Drop,
}

#[derive(Debug, Clone)]
pub struct SeriesTask {
    pub catchment_id: String,
    pub series: TimeSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub catchment_id: String,
    pub variable: VariableKind,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exclusion {
    pub catchment_id: String,
    pub variable: Option<VariableKind>,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutput {
    pub rows: Vec<FeatureRow>,
    pub exclusions: Vec<Exclusion>,
}

#[derive(Debug, Clone)]
pub struct BatchError {
    pub failures: Vec<Exclusion>,
}

impl fmt::Display for BatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} series failed feature extraction", self.failures.len())?;
        for e in &self.failures {
            let var = e.variable.map_or("-", VariableKind::as_str);
            write!(f, "\n  {} {}: {}", e.catchment_id, var, e.reason)?;
        }
        Ok(())
    }
}

impl std::error::Error for BatchError {}

/// Runs `f` on a pool with exactly `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Extracts features for every task; output sorted by (catchment id, variable).
pub fn extract_batch(
    tasks: &[SeriesTask],
    config: &FeatureConfig,
    policy: FailurePolicy,
    workers: usize,
) -> Result<BatchOutput, BatchError> {
    let results: Vec<_> = with_workers(workers, || {
        tasks
            .par_iter()
            .map(|t| (t, extract_features(&t.series, config)))
            .collect()
    });
    let mut out = BatchOutput::default();
    for (task, res) in results {
        match res {
            Ok(features) => out.rows.push(FeatureRow {
                catchment_id: task.catchment_id.clone(),
                variable: task.series.kind,
                features,
            }),
            Err(e) => {
                let ex = Exclusion {
                    catchment_id: task.catchment_id.clone(),
                    variable: Some(task.series.kind),
                    reason: e.to_string(),
                };
                if policy == FailurePolicy::Drop {
                    warn!("dropping {} {}: {}", ex.catchment_id, task.series.kind, ex.reason);
                }
                out.exclusions.push(ex);
            }
        }
    }
    if policy == FailurePolicy::Strict && !out.exclusions.is_empty() {
        out.exclusions.sort();
        return Err(BatchError {
            failures: out.exclusions,
        });
    }
    out.rows
        .sort_by(|a, b| (&a.catchment_id, a.variable).cmp(&(&b.catchment_id, b.variable)));
    out.exclusions.sort();
    Ok(out)
}

/// Writes `catchment_id,variable,<28 features>` with round-trip decimal values.
pub fn write_feature_table<W: Write>(rows: &[FeatureRow], w: W) -> Result<(), DataError> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["catchment_id", "variable"];
    header.extend(FEATURE_NAMES);
    wr.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![row.catchment_id.clone(), row.variable.to_string()];
        rec.extend(row.features.values().iter().map(|v| v.to_string()));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| DataError::Format(e.to_string()))?;
    Ok(())
}

pub fn read_feature_table<R: Read>(r: R) -> Result<Vec<FeatureRow>, DataError> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    let expected: Vec<&str> = ["catchment_id", "variable"].into_iter().chain(FEATURE_NAMES).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(DataError::Format("feature table header does not match the canonical columns".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let variable = VariableKind::parse(&rec[1])
            .ok_or_else(|| DataError::Format(format!("line {line}: unknown variable `{}`", &rec[1])))?;
        let mut values = [0.0; N_FEATURES];
        for (k, v) in values.iter_mut().enumerate() {
            *v = rec[k + 2]
                .parse()
                .map_err(|_| DataError::Format(format!("line {line}: bad number `{}`", &rec[k + 2])))?;
        }
        let features =
            FeatureVector::from_values(values).map_err(|e| DataError::Format(format!("line {line}: {e}")))?;
        rows.push(FeatureRow {
            catchment_id: rec[0].to_string(),
            variable,
            features,
        });
    }
    Ok(rows)
}

pub(crate) fn csv_err(e: csv::Error) -> DataError {
    DataError::Format(e.to_string())
}
