use std::path::PathBuf;

use thiserror::Error;

/// Failures while validating a series or computing one of its features.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("missing value at index {index}")]
    MissingData { index: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("series too short: {len} values, need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("lag {lag} too large for series of length {len}")]
    LagTooLarge { lag: usize, len: usize },
    #[error("Durbin-Levinson recursion became singular at lag {lag}")]
    NumericalSingularity { lag: usize },
    #[error("series range is degenerate (max == min)")]
    DegenerateRange,
    #[error("regression design matrix is rank deficient")]
    SingularDesign,
    #[error("all loess weights vanished at position {position}")]
    SingularFit { position: usize },
    #[error("decomposition variance is zero")]
    DegenerateVariance,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("feature `{feature}`: {source}")]
    InFeature {
        feature: &'static str,
        #[source]
        source: Box<FeatureError>,
    },
}

impl FeatureError {
    pub(crate) fn in_feature(self, feature: &'static str) -> Self {
        match self {
            FeatureError::InFeature { .. } => self,
            other => FeatureError::InFeature {
                feature,
                source: Box::new(other),
            },
        }
    }

    /// The underlying error with feature annotations stripped.
    pub fn root(&self) -> &FeatureError {
        match self {
            FeatureError::InFeature { source, .. } => source.root(),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForestError {
    #[error("target is constant")]
    DegenerateTarget,
    #[error("no predictors")]
    EmptyPredictors,
    #[error("design matrix: {0}")]
    InvalidData(String),
    #[error("expected {expected} predictor columns, got {got}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("no row has out-of-bag predictions")]
    NoOobCoverage,
    #[error("invalid hyperparameter: {0}")]
    InvalidParameter(String),
}

/// Errors from ingestion, analyses and report I/O.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("catchment {catchment}: {reason}")]
    IncompleteRecord { catchment: String, reason: String },
    #[error("attribute `{0}` not found in attributes file")]
    UnknownAttribute(String),
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("vector is constant")]
    ConstantVector,
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("invalid fold count k={k} for n={n}")]
    BadK { n: usize, k: usize },
    #[error("unknown streamflow feature `{0}`")]
    UnknownFeature(String),
    #[error("target `{target}`, group {group}: {source}")]
    Pair {
        target: String,
        group: String,
        #[source]
        source: ForestError,
    },
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.into(),
            source,
        }
    }
}
