//! Catchment records and the seven predictor groups.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{feature_index, FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::error::{DataError, ForestError};
use crate::forest::DesignMatrix;
use crate::series::VariableKind;

pub const N_STATIC: usize = 19;

/// Static attributes in reporting order; the `log_` ones are stored log-transformed.
pub const STATIC_ATTRIBUTES: [&str; N_STATIC] = [
    "log_elev_mean",
    "log_slope_mean",
    "log_area_gages2",
    "frac_forest",
    "lai_max",
    "gvf_diff",
    "dom_land_cover_frac",
    "soil_depth_pelletier",
    "soil_depth_statsgo",
    "max_water_content",
    "sand_frac",
    "silt_frac",
    "clay_frac",
    "water_frac",
    "organic_frac",
    "other_frac",
    "carbonate_rocks_frac",
    "geol_porosity",
    "geol_permeability",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CatchmentRecord {
    pub catchment_id: String,
    pub static_attributes: [f64; N_STATIC],
    pub temperature: FeatureVector,
    pub precipitation: FeatureVector,
    pub streamflow: FeatureVector,
}

impl CatchmentRecord {
    pub fn features(&self, kind: VariableKind) -> &FeatureVector {
        match kind {
            VariableKind::Temperature => &self.temperature,
            VariableKind::Precipitation => &self.precipitation,
            VariableKind::Streamflow => &self.streamflow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PredictorGroup {
    S,
    T,
    P,
    #[serde(rename = "S+T")]
    ST,
    #[serde(rename = "S+P")]
    SP,
    #[serde(rename = "T+P")]
    TP,
    #[serde(rename = "S+T+P")]
    STP,
}

impl PredictorGroup {
    /// Canonical order, also the rank tie-break order.
    pub const ALL: [PredictorGroup; 7] = [
        PredictorGroup::S,
        PredictorGroup::T,
        PredictorGroup::P,
        PredictorGroup::ST,
        PredictorGroup::SP,
        PredictorGroup::TP,
        PredictorGroup::STP,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PredictorGroup::S => "S",
            PredictorGroup::T => "T",
            PredictorGroup::P => "P",
            PredictorGroup::ST => "S+T",
            PredictorGroup::SP => "S+P",
            PredictorGroup::TP => "T+P",
            PredictorGroup::STP => "S+T+P",
        }
    }

    /// Accepts labels like `S+T+P`, `STP` or `s+p`.
    pub fn parse(s: &str) -> Option<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '+' | ' ' | '_' | ',' | '∪'))
            .collect::<String>()
            .to_ascii_uppercase();
        Self::ALL.into_iter().find(|g| g.label().replace('+', "") == key)
    }

    pub fn has_static(self) -> bool {
        matches!(self, Self::S | Self::ST | Self::SP | Self::STP)
    }

    pub fn has_temperature(self) -> bool {
        matches!(self, Self::T | Self::ST | Self::TP | Self::STP)
    }

    pub fn has_precipitation(self) -> bool {
        matches!(self, Self::P | Self::SP | Self::TP | Self::STP)
    }

    pub fn n_columns(self) -> usize {
        let mut n = 0;
        if self.has_static() {
            n += N_STATIC;
        }
        if self.has_temperature() {
            n += N_FEATURES;
        }
        if self.has_precipitation() {
            n += N_FEATURES;
        }
        n
    }

    pub fn column_names(self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_columns());
        if self.has_static() {
            names.extend(STATIC_ATTRIBUTES.iter().map(|s| s.to_string()));
        }
        if self.has_temperature() {
            names.extend(dynamic_names(VariableKind::Temperature));
        }
        if self.has_precipitation() {
            names.extend(dynamic_names(VariableKind::Precipitation));
        }
        names
    }

    /// Predictor values of one record, aligned with `column_names`.
    pub fn row(self, r: &CatchmentRecord) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.n_columns());
        if self.has_static() {
            row.extend_from_slice(&r.static_attributes);
        }
        if self.has_temperature() {
            row.extend_from_slice(r.temperature.values());
        }
        if self.has_precipitation() {
            row.extend_from_slice(r.precipitation.values());
        }
        row
    }
}

impl fmt::Display for PredictorGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn dynamic_names(kind: VariableKind) -> impl Iterator<Item = String> {
    FEATURE_NAMES.iter().map(move |f| format!("{kind}.{f}"))
}

/// All 75 potential predictors: static, temperature and precipitation blocks.
pub fn all_predictor_names() -> Vec<String> {
    PredictorGroup::STP.column_names()
}

pub fn target_index(target: &str) -> Result<usize, DataError> {
    feature_index(target).ok_or_else(|| DataError::UnknownFeature(target.to_string()))
}

/// Design matrix of `group` predictors against one streamflow feature.
pub fn design_matrix(
    records: &[CatchmentRecord],
    group: PredictorGroup,
    target: usize,
) -> Result<DesignMatrix, ForestError> {
    let names = group.column_names();
    let rows: Vec<Vec<f64>> = records.iter().map(|r| group.row(r)).collect();
    let columns = (0..names.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let y = records.iter().map(|r| r.streamflow[target]).collect();
    DesignMatrix::new(names, columns, y)
}
