//! Vulnerability fix timelines, update strategies and downstream features.

mod features;
pub mod stats;
mod strategy;
mod timeline;

pub use features::{
    build_dataset, extract_extra_features, extract_features, read_feature_table, write_feature_table, DatasetOptions,
    DatasetRecord, ExtraFeatures, FeatureVector, TableRow, DAYS_PER_MONTH, FEATURE_COUNT,
};
pub use strategy::{classify_constraint, classify_update_strategy, StrategyClass};
pub use timeline::{
    adoption_delay, analyze_advisory, analyze_timelines, find_vulnerable_dependents, fix_delay_days, fix_release_type,
    summarize, vulnerable_check_date, AdvisoryTimeline, Center, ExposureRecord, GroupSummary, SeverityFilter,
    VulnerableDependent,
};

use thiserror::Error;

use crate::ecosystem::Timestamp;
use crate::semver::Version;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VulnError {
    #[error("advisory {advisory}: {package} has no release before the fixing release")]
    InsufficientHistory { advisory: String, package: String },
    #[error("{dependent} was not exposed to advisory {advisory} the day before the fix")]
    NotVulnerable { dependent: String, advisory: String },
    #[error("{package} has no release published by {at}")]
    NoReleases { package: String, at: Timestamp },
    #[error("{package}@{version} is not in the snapshot")]
    UnknownRelease { package: String, version: Version },
}
