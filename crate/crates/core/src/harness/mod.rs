//! Splits, cross-validation, the relative-error metric and summary tables.

pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod splits;

pub use metrics::{relative_error, ErrorStats};
pub use pipeline::{
    clip_to_ball, cross_validate, evaluate_split, predict_with_chart, score_cases, train, BasisPrediction, CaseRecord, Dataset,
    ExperimentConfig, Method, TrainedModel, problem_defaults, WAVE_RANK,
};
pub use report::{format_table, read_records_csv, records_csv, summarize, summarize_folds, MethodSummary};
pub use splits::{kfold, split_mod3};
