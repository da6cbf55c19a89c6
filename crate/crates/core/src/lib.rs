//! Time-series features of daily hydrometeorological records and random-forest
//! regionalization of streamflow features to ungauged catchments.

pub mod dependence;
pub mod distributional;
pub mod engine;
pub mod error;
pub mod forest;
pub mod regionalization;
pub mod series;
pub mod stl;
pub mod synthetic;

pub use engine::{extract_batch, extract_features, FeatureConfig, FeatureVector, FEATURE_NAMES};
pub use error::{DataError, FeatureError, ForestError};
pub use series::{StandardizedSeries, TimeSeries, VariableKind};

#[cfg(test)]
pub(crate) mod testutil {
    pub use crate::synthetic::signals::*;
}
