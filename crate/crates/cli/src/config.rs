//! Run configuration: defaults, overlaid by an optional TOML file, overlaid by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::NaiveDate;
use hydrofeat::engine::{FailurePolicy, FeatureConfig};
use hydrofeat::forest::ForestParams;
use hydrofeat::regionalization::ingest::IngestConfig;
use hydrofeat::regionalization::PredictorGroup;
use hydrofeat::synthetic::dataset::{SyntheticConfig, SYNTHETIC_CATCHMENTS, SYNTHETIC_SEED};
use serde::{Deserialize, Serialize};

/// Name of the effective-configuration echo written into the output directory.
pub const CONFIG_ECHO: &str = "run_config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub series_dir: Option<PathBuf>,
    pub attributes_file: Option<PathBuf>,
    /// Reuse a previously written feature table instead of extracting.
    pub features_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub synthetic: bool,
    pub synthetic_catchments: usize,
    pub synthetic_seed: u64,
    pub seed: u64,
    pub trees: usize,
    pub folds: usize,
    pub period: usize,
    pub workers: usize,
    /// Predictor groups for crossval; empty means all seven.
    pub groups: Vec<String>,
    pub policy: FailurePolicy,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub drop_leap_days: bool,
    pub log_transform_attributes: bool,
    pub mtry: Option<usize>,
    pub min_node_size: usize,
    pub features: FeatureConfig,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Default for RunConfig {
    fn default() -> Self {
        let window = IngestConfig::default();
        let forest = ForestParams::default();
        Self {
            series_dir: None,
            attributes_file: None,
            features_file: None,
            output_dir: PathBuf::from("out"),
            synthetic: false,
            synthetic_catchments: SYNTHETIC_CATCHMENTS,
            synthetic_seed: SYNTHETIC_SEED,
            seed: 42,
            trees: forest.n_trees,
            folds: 10,
            period: window.period,
            workers: default_workers(),
            groups: Vec::new(),
            policy: FailurePolicy::Drop,
            start: window.start,
            end: window.end,
            drop_leap_days: window.drop_leap_days,
            log_transform_attributes: window.log_transform_attributes,
            mtry: forest.mtry,
            min_node_size: forest.min_node_size,
            features: FeatureConfig::default(),
        }
    }
}

/// Values given on the command line; `None` leaves the lower layers in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub series_dir: Option<PathBuf>,
    pub attributes_file: Option<PathBuf>,
    pub features_file: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub synthetic: bool,
    pub seed: Option<u64>,
    pub trees: Option<usize>,
    pub folds: Option<usize>,
    pub period: Option<usize>,
    pub workers: Option<usize>,
    pub groups: Vec<String>,
    pub policy: Option<FailurePolicy>,
    pub log_transform_attributes: bool,
    pub keep_leap_days: bool,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Applies flag values on top of this configuration.
    pub fn apply(&mut self, o: Overrides) {
        fn set<T>(slot: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if o.series_dir.is_some() {
            self.series_dir = o.series_dir;
        }
        if o.attributes_file.is_some() {
            self.attributes_file = o.attributes_file;
        }
        if o.features_file.is_some() {
            self.features_file = o.features_file;
        }
        set(&mut self.output_dir, o.output_dir);
        self.synthetic |= o.synthetic;
        set(&mut self.seed, o.seed);
        set(&mut self.trees, o.trees);
        set(&mut self.folds, o.folds);
        set(&mut self.period, o.period);
        set(&mut self.workers, o.workers);
        if !o.groups.is_empty() {
            self.groups = o.groups;
        }
        set(&mut self.policy, o.policy);
        self.log_transform_attributes |= o.log_transform_attributes;
        if o.keep_leap_days {
            self.drop_leap_days = false;
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trees < 1 {
            bail!("trees must be at least 1");
        }
        if self.folds < 2 {
            bail!("folds must be at least 2");
        }
        if self.period < 2 {
            bail!("period must be at least 2");
        }
        if self.workers < 1 {
            bail!("workers must be at least 1");
        }
        if self.min_node_size < 1 {
            bail!("min_node_size must be at least 1");
        }
        if self.mtry == Some(0) {
            bail!("mtry must be at least 1");
        }
        if self.end < self.start {
            bail!("window end {} precedes start {}", self.end, self.start);
        }
        if self.synthetic && self.synthetic_catchments < 3 {
            bail!("synthetic_catchments must be at least 3");
        }
        self.predictor_groups()?;
        Ok(())
    }

    pub fn predictor_groups(&self) -> anyhow::Result<Vec<PredictorGroup>> {
        self.groups
            .iter()
            .map(|g| PredictorGroup::parse(g).with_context(|| format!("unknown predictor group `{g}`")))
            .collect()
    }

    pub fn ingest(&self) -> IngestConfig {
        IngestConfig {
            start: self.start,
            end: self.end,
            drop_leap_days: self.drop_leap_days,
            log_transform_attributes: self.log_transform_attributes,
            period: self.period,
        }
    }

    pub fn forest(&self) -> ForestParams {
        ForestParams {
            n_trees: self.trees,
            mtry: self.mtry,
            min_node_size: self.min_node_size,
        }
    }

    pub fn synthetic_config(&self) -> SyntheticConfig {
        SyntheticConfig {
            n_catchments: self.synthetic_catchments,
            seed: self.synthetic_seed,
            window: self.ingest(),
        }
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        toml::to_string(self).context("serializing effective configuration")
    }
}
