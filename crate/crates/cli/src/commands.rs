//! The five subcommands. Each loads (or extracts) catchment records, runs one
//! analysis and writes its output files into the output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use hydrofeat::engine::{read_feature_table, write_feature_table, Exclusion, FeatureRow};
use hydrofeat::regionalization::ingest::{read_attributes, records_from_table};
use hydrofeat::regionalization::report::{
    write_correlations, write_evaluation, write_exclusions, write_importance, write_pred_vs_obs, write_summaries,
};
use hydrofeat::regionalization::{
    correlation_matrix, evaluate_all, feature_summary, importance_all, load_dataset, CatchmentRecord,
};
use hydrofeat::synthetic::dataset::generate;
use hydrofeat::{DataError, VariableKind};
use log::info;

use crate::config::{RunConfig, CONFIG_ECHO};

pub const EXIT_ANALYSIS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EXTRACTION: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn new(code: i32, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }
}

fn exit_code(e: &DataError) -> i32 {
    match e {
        DataError::Io { .. } | DataError::Parse { .. } | DataError::UnknownAttribute(_) | DataError::Format(_) => {
            EXIT_INPUT
        }
        DataError::IncompleteRecord { .. } | DataError::Feature(_) => EXIT_EXTRACTION,
        _ => EXIT_ANALYSIS,
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        Self::new(exit_code(&e), e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Extract,
    Correlate,
    Importance,
    Crossval,
    Report,
}

struct Dataset {
    records: Vec<CatchmentRecord>,
    exclusions: Vec<Exclusion>,
}

fn require(path: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    path.clone().ok_or_else(|| {
        CliError::new(
            EXIT_CONFIG,
            anyhow!("no {what} given (use the flag, the config file, or --synthetic)"),
        )
    })
}

fn load(cfg: &RunConfig) -> Result<Dataset, CliError> {
    if let Some(table) = &cfg.features_file {
        let attributes = require(&cfg.attributes_file, "attributes file (--attributes)")?;
        let attrs = read_attributes(&attributes, cfg.log_transform_attributes)?;
        let file = File::open(table).map_err(|e| DataError::Io {
            path: table.clone(),
            source: e,
        })?;
        let rows = read_feature_table(file)?;
        let (records, exclusions) = records_from_table(&rows, &attrs);
        info!("read {} catchments from {}", records.len(), table.display());
        return Ok(Dataset { records, exclusions });
    }

    let (series_dir, attributes) = if cfg.synthetic {
        let dir = cfg.output_dir.join("synthetic");
        info!("generating {} synthetic catchments in {}", cfg.synthetic_catchments, dir.display());
        let data = generate(&cfg.synthetic_config(), &cfg.features).map_err(|e| CliError::from(DataError::from(e)))?;
        data.write(&dir)
            .with_context(|| format!("writing synthetic dataset to {}", dir.display()))
            .map_err(|e| CliError::new(EXIT_ANALYSIS, e))?
    } else {
        (
            require(&cfg.series_dir, "series directory (--series-dir)")?,
            require(&cfg.attributes_file, "attributes file (--attributes)")?,
        )
    };
    if !attributes.is_file() {
        return Err(CliError::new(
            EXIT_INPUT,
            anyhow!("attributes file not found: {}", attributes.display()),
        ));
    }
    let loaded = load_dataset(&series_dir, &attributes, &cfg.ingest(), &cfg.features, cfg.policy, cfg.workers)?;
    info!(
        "loaded {} catchments, {} exclusions",
        loaded.records.len(),
        loaded.exclusions.len()
    );
    Ok(Dataset {
        records: loaded.records,
        exclusions: loaded.exclusions,
    })
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<(), DataError>) -> Result<(), CliError> {
    let path = dir.join(name);
    let io_err = |e: std::io::Error| CliError::new(EXIT_ANALYSIS, anyhow!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
    f(&mut w).map_err(|e| CliError::new(EXIT_ANALYSIS, e))?;
    w.flush().map_err(io_err)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn feature_rows(records: &[CatchmentRecord]) -> Vec<FeatureRow> {
    records
        .iter()
        .flat_map(|r| {
            VariableKind::ALL.into_iter().map(move |kind| FeatureRow {
                catchment_id: r.catchment_id.clone(),
                variable: kind,
                features: r.features(kind).clone(),
            })
        })
        .collect()
}

fn analysis(e: DataError) -> CliError {
    CliError::new(EXIT_ANALYSIS, e)
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let out = &cfg.output_dir;
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))
        .map_err(|e| CliError::new(EXIT_ANALYSIS, e))?;
    let echo = cfg.to_toml().map_err(|e| CliError::new(EXIT_CONFIG, e))?;
    write_file(out, CONFIG_ECHO, |w| {
        w.write_all(echo.as_bytes()).map_err(|e| DataError::Format(e.to_string()))
    })?;

    let data = load(cfg)?;
    write_file(out, "exclusions.csv", |w| write_exclusions(&data.exclusions, w))?;
    let records = &data.records;
    match command {
        Command::Extract => write_file(out, "features.csv", |w| write_feature_table(&feature_rows(records), w)),
        Command::Correlate => {
            let m = correlation_matrix(records).map_err(analysis)?;
            write_file(out, "correlations.csv", |w| write_correlations(&m, w))
        }
        Command::Importance => {
            let reports = importance_all(records, &cfg.forest(), cfg.seed).map_err(analysis)?;
            write_file(out, "importance.csv", |w| write_importance(&reports, w))
        }
        Command::Crossval => {
            let groups = cfg.predictor_groups().map_err(|e| CliError::new(EXIT_CONFIG, e))?;
            let report = evaluate_all(records, &groups, &cfg.forest(), cfg.folds, cfg.seed).map_err(analysis)?;
            write_file(out, "evaluation.json", |w| write_evaluation(&report, w))?;
            write_file(out, "pred_vs_obs.csv", |w| write_pred_vs_obs(&report.predicted_vs_observed, w))
        }
        Command::Report => {
            let summary = feature_summary(records);
            write_file(out, "summaries.csv", |w| write_summaries(&summary, w))
        }
    }
}
