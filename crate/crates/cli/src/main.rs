//! `hydrofeat`: feature extraction and regionalization analyses for catchment
//! time series.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hydrofeat::engine::{with_workers, FailurePolicy};
use log::error;

use commands::{CliError, Command, EXIT_CONFIG};
use config::{Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hydrofeat", version, about = "Time-series features and regionalization of streamflow signatures")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Sub {
    /// Extract the 28 features of every series into features.csv.
    Extract,
    /// Spearman correlations of all predictors with every streamflow feature.
    Correlate,
    /// Permutation importance of all predictors for every streamflow feature.
    Importance,
    /// Cross-validated RMSE, ranks and relative scores for every predictor group.
    Crossval,
    /// Distribution summaries of every feature over catchments.
    Report,
}

#[derive(Args, Debug)]
struct Opts {
    /// Directory holding `<id>_<variable>.csv` series files.
    #[arg(long, global = true, value_name = "DIR")]
    series_dir: Option<PathBuf>,
    /// Static attributes table.
    #[arg(long, global = true, value_name = "FILE")]
    attributes: Option<PathBuf>,
    /// Reuse an existing features.csv instead of extracting.
    #[arg(long, global = true, value_name = "FILE")]
    features: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// TOML configuration file; flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed for fold partitions, forests and permutations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trees per forest.
    #[arg(long, global = true)]
    trees: Option<usize>,
    /// Cross-validation folds.
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Seasonal period in days.
    #[arg(long, global = true)]
    period: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Restrict crossval to these predictor groups, e.g. `S,P,S+T+P`.
    #[arg(long, global = true, value_delimiter = ',')]
    group: Vec<String>,
    /// Fail on the first series that cannot be used.
    #[arg(long, global = true, conflicts_with = "drop")]
    strict: bool,
    /// Drop unusable catchments and list them in exclusions.csv (default).
    #[arg(long, global = true)]
    drop: bool,
    /// Generate and use the synthetic 60-catchment dataset.
    #[arg(long, global = true)]
    synthetic: bool,
    /// Attributes hold raw elevation, slope and area; take log10 on load.
    #[arg(long, global = true)]
    log_attributes: bool,
    /// Keep 29 February instead of dropping it.
    #[arg(long, global = true)]
    keep_leap_days: bool,
}

impl Opts {
    fn overrides(self) -> (Option<PathBuf>, Overrides) {
        let policy = if self.strict {
            Some(FailurePolicy::Strict)
        } else if self.drop {
            Some(FailurePolicy::Drop)
        } else {
            None
        };
        let o = Overrides {
            series_dir: self.series_dir,
            attributes_file: self.attributes,
            features_file: self.features,
            output_dir: self.out,
            synthetic: self.synthetic,
            seed: self.seed,
            trees: self.trees,
            folds: self.folds,
            period: self.period,
            workers: self.workers,
            groups: self.group,
            policy,
            log_transform_attributes: self.log_attributes,
            keep_leap_days: self.keep_leap_days,
        };
        (self.config, o)
    }
}

fn effective_config(opts: Opts) -> Result<RunConfig, CliError> {
    let (file, overrides) = opts.overrides();
    let mut cfg = match file {
        Some(path) => RunConfig::from_file(&path).map_err(|e| CliError::new(EXIT_CONFIG, e))?,
        None => RunConfig::default(),
    };
    cfg.apply(overrides);
    cfg.validate().map_err(|e| CliError::new(EXIT_CONFIG, e))?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let command = match cli.command {
        Sub::Extract => Command::Extract,
        Sub::Correlate => Command::Correlate,
        Sub::Importance => Command::Importance,
        Sub::Crossval => Command::Crossval,
        Sub::Report => Command::Report,
    };
    let result = effective_config(cli.opts).and_then(|cfg| with_workers(cfg.workers, || commands::run(command, &cfg)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{}", describe(&e.error));
            ExitCode::from(e.code as u8)
        }
    }
}

/// Joins an error with its causes, skipping causes whose text the previous message already carries.
fn describe(error: &anyhow::Error) -> String {
    let mut message = error.to_string();
    let mut last = message.clone();
    for cause in error.chain().skip(1) {
        let text = cause.to_string();
        if !last.contains(&text) {
            message.push_str(": ");
            message.push_str(&text);
        }
        last = text;
    }
    message
}
