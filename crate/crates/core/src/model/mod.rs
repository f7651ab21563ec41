//! Fast/slow responder labeling and the bagged decision-tree classifier.

mod data;
mod explain;
mod forest;
mod label;
mod metrics;

pub use data::{
    cross_validate, feature_names, stratified_folds, stratified_split, synthetic, synthetic_rows, to_matrix, CvReport,
    LabeledSample, SyntheticSpec,
};
pub use explain::{
    grid_values, partial_dependence, permutation_importance, FeatureImportance, GridSpec, IceOptions, IceTrace,
    ImportanceReport, PdpCurve, DEFAULT_ICE_SAMPLE, DEFAULT_REPEATS,
};
pub use forest::{
    train_forest, tree_rng, Forest, ForestParams, MaxFeatures, Node, TrainingInfo, Tree, FORMAT_NAME, FORMAT_VERSION,
};
pub use label::{label, label_censored, Label, LabelConfig};
pub use metrics::{classification, roc_auc, stratified_baseline, Classification, DEFAULT_THRESHOLD};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("no samples")]
    Empty,
    #[error("training data must contain both fast and slow samples")]
    SingleClass,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("non-finite feature value")]
    NonFinite,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("model file: {0}")]
    Format(String),
}
