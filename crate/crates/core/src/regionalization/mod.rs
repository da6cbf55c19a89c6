//! Regionalization analyses over a set of catchments: ingestion, predictor
//! groups, correlations, cross-validated prediction and reports.

pub mod correlation;
pub mod ingest;
pub mod records;
pub mod report;
pub mod summary;
pub mod validation;

pub use correlation::{correlation_matrix, spearman, CorrelationMatrix};
pub use ingest::{load_dataset, IngestConfig, LoadedDataset};
pub use records::{all_predictor_names, design_matrix, CatchmentRecord, PredictorGroup, STATIC_ATTRIBUTES};
pub use summary::{feature_summary, FeatureSummary};
pub use validation::{
    cross_validate, evaluate_all, importance_all, kfold_split, rmse, CvResult, EvaluationReport, FoldPartition,
    PredictedObserved, TargetImportance,
};
