use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::strategy::StrategyClass;
use super::timeline::{AdvisoryTimeline, ExposureRecord};
use super::VulnError;
use crate::ecosystem::{days_between, Severity, Snapshot, Timestamp};
use crate::model::{label, label_censored, Label, LabelConfig};
use crate::semver::Version;

pub const DAYS_PER_MONTH: f64 = 30.44;
pub const FEATURE_COUNT: usize = 9;

/// Downstream package characteristics at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub package_age_days: f64,
    pub balanced: u8,
    pub restrictive: u8,
    pub permissive: u8,
    pub release_frequency_per_month: f64,
    pub dependency_count: u32,
    pub dependent_count: u32,
    pub release_status_post100: u8,
    pub dependency_modifications: u32,
}

impl FeatureVector {
    pub const NAMES: [&'static str; FEATURE_COUNT] = [
        "package_age_days",
        "balanced",
        "restrictive",
        "permissive",
        "release_frequency_per_month",
        "dependency_count",
        "dependent_count",
        "release_status_post100",
        "dependency_modifications",
    ];

    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.package_age_days,
            self.balanced as f64,
            self.restrictive as f64,
            self.permissive as f64,
            self.release_frequency_per_month,
            self.dependency_count as f64,
            self.dependent_count as f64,
            self.release_status_post100 as f64,
            self.dependency_modifications as f64,
        ]
    }

    /// Inverse of [`to_array`](Self::to_array); rejects values that a
    /// feature cannot take.
    pub fn from_array(x: &[f64]) -> Result<Self, String> {
        if x.len() != FEATURE_COUNT {
            return Err(format!("expected {FEATURE_COUNT} features, got {}", x.len()));
        }
        let bit = |i: usize| -> Result<u8, String> {
            let v = x[i];
            if v == 0.0 {
                Ok(0)
            } else if v == 1.0 {
                Ok(1)
            } else {
                Err(format!("{} must be 0 or 1, got {v}", Self::NAMES[i]))
            }
        };
        let count = |i: usize| -> Result<u32, String> {
            let v = x[i];
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(format!("{} must be a non-negative integer, got {v}", Self::NAMES[i]))
            }
        };
        let real = |i: usize| -> Result<f64, String> {
            let v = x[i];
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(format!("{} must be a non-negative number, got {v}", Self::NAMES[i]))
            }
        };
        let fv = FeatureVector {
            package_age_days: real(0)?,
            balanced: bit(1)?,
            restrictive: bit(2)?,
            permissive: bit(3)?,
            release_frequency_per_month: real(4)?,
            dependency_count: count(5)?,
            dependent_count: count(6)?,
            release_status_post100: bit(7)?,
            dependency_modifications: count(8)?,
        };
        if fv.balanced + fv.restrictive + fv.permissive > 1 {
            return Err("at most one strategy bit may be set".into());
        }
        Ok(fv)
    }

    pub fn strategy(&self) -> StrategyClass {
        match (self.balanced, self.restrictive, self.permissive) {
            (1, _, _) => StrategyClass::Balanced,
            (_, 1, _) => StrategyClass::Restrictive,
            (_, _, 1) => StrategyClass::Permissive,
            _ => StrategyClass::Unclassified,
        }
    }
}

/// Features the analysis drops for redundancy; available on request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtraFeatures {
    pub package_version_count: u32,
    pub days_since_last_release: f64,
}

impl ExtraFeatures {
    pub const NAMES: [&'static str; 2] = ["package_version_count", "days_since_last_release"];
}

fn runtime_map(s: &Snapshot, pkg: &str, v: &Version) -> BTreeMap<String, String> {
    s.runtime_edges(pkg, v).map(|e| (e.name.clone(), e.constraint.clone())).collect()
}

pub fn extract_features(
    s: &Snapshot,
    dependent: &str,
    at: Timestamp,
    strategy: StrategyClass,
) -> Result<FeatureVector, VulnError> {
    let all = s.releases(dependent);
    let releases = &all[..all.partition_point(|r| r.published_at <= at)];
    let (Some(first), Some(latest)) = (releases.first(), releases.last()) else {
        return Err(VulnError::NoReleases { package: dependent.to_string(), at });
    };
    let age = days_between(first.published_at, at).max(0.0);
    let frequency = if age < 1.0 { 0.0 } else { releases.len() as f64 / (age / DAYS_PER_MONTH) };

    let dependent_count = s
        .dependents_of(dependent)
        .iter()
        .filter(|p| p.as_str() != dependent)
        .filter(|p| {
            s.releases(p)
                .iter()
                .take_while(|r| r.published_at <= at)
                .any(|r| s.runtime_edges(p, &r.version).any(|e| e.name == dependent))
        })
        .count();

    let maps: Vec<_> = releases.iter().map(|r| runtime_map(s, dependent, &r.version)).collect();
    let modifications = maps.windows(2).filter(|w| w[0] != w[1]).count();

    Ok(FeatureVector {
        package_age_days: age,
        balanced: (strategy == StrategyClass::Balanced) as u8,
        restrictive: (strategy == StrategyClass::Restrictive) as u8,
        permissive: (strategy == StrategyClass::Permissive) as u8,
        release_frequency_per_month: frequency,
        dependency_count: s.runtime_edges(dependent, &latest.version).count() as u32,
        dependent_count: dependent_count as u32,
        release_status_post100: (latest.version >= Version::new(1, 0, 0)) as u8,
        dependency_modifications: modifications as u32,
    })
}

pub fn extract_extra_features(s: &Snapshot, dependent: &str, at: Timestamp) -> Result<ExtraFeatures, VulnError> {
    let all = s.releases(dependent);
    let releases = &all[..all.partition_point(|r| r.published_at <= at)];
    let latest = releases.last().ok_or_else(|| VulnError::NoReleases { package: dependent.to_string(), at })?;
    Ok(ExtraFeatures {
        package_version_count: releases.len() as u32,
        days_since_last_release: days_between(latest.published_at, at).max(0.0),
    })
}

/// One model-ready row: a dependent's most recent vulnerable dependency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetRecord {
    pub dependent: String,
    pub advisory_id: String,
    pub severity: Severity,
    pub fix_released_at: Timestamp,
    pub constraint: String,
    pub strategy: StrategyClass,
    pub adoption_delay_days: f64,
    pub censored: bool,
    pub label: Option<Label>,
    pub features: FeatureVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extras: Option<ExtraFeatures>,
}

#[derive(Debug, Clone, Default)]
pub struct DatasetOptions {
    pub labels: LabelConfig,
    pub include_extras: bool,
}

/// Builds one record per dependent from its most recent exposure (by fix
/// date, then advisory id), with features taken at the fix date.
pub fn build_dataset(
    s: &Snapshot,
    timelines: &[AdvisoryTimeline],
    opts: &DatasetOptions,
) -> Result<Vec<DatasetRecord>, VulnError> {
    let mut latest: BTreeMap<&str, (&AdvisoryTimeline, &ExposureRecord)> = BTreeMap::new();
    for t in timelines {
        for e in &t.exposures {
            let slot = latest.entry(e.dependent.as_str()).or_insert((t, e));
            if (t.fix_released_at, &t.advisory_id) > (slot.0.fix_released_at, &slot.0.advisory_id) {
                *slot = (t, e);
            }
        }
    }
    latest
        .into_values()
        .map(|(t, e)| {
            let features = extract_features(s, &e.dependent, t.fix_released_at, e.strategy)?;
            let extras = if opts.include_extras {
                Some(extract_extra_features(s, &e.dependent, t.fix_released_at)?)
            } else {
                None
            };
            let label = if e.censored {
                label_censored(e.adoption_delay_days, &opts.labels)
            } else {
                label(e.adoption_delay_days, &opts.labels)
            };
            Ok(DatasetRecord {
                dependent: e.dependent.clone(),
                advisory_id: t.advisory_id.clone(),
                severity: t.severity,
                fix_released_at: t.fix_released_at,
                constraint: e.constraint.clone(),
                strategy: e.strategy,
                adoption_delay_days: e.adoption_delay_days,
                censored: e.censored,
                label,
                features,
                extras,
            })
        })
        .collect()
}

const TABLE_PREFIX: [&str; 5] = ["dependent", "advisory_id", "severity", "adoption_delay_days", "label"];

/// Writes a CSV feature table: identifying columns, the label (empty when
/// unlabeled), the nine features, and the extras when present.
pub fn write_feature_table<W: Write>(records: &[DatasetRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let with_extras = records.iter().any(|r| r.extras.is_some());
    let mut header: Vec<&str> = TABLE_PREFIX.to_vec();
    header.extend(FeatureVector::NAMES);
    if with_extras {
        header.extend(ExtraFeatures::NAMES);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.dependent.clone(),
            r.advisory_id.clone(),
            r.severity.to_string(),
            r.adoption_delay_days.to_string(),
            r.label.map(|l| l.to_string()).unwrap_or_default(),
        ];
        row.extend(r.features.to_array().iter().map(f64::to_string));
        if with_extras {
            match r.extras {
                Some(x) => {
                    row.push(x.package_version_count.to_string());
                    row.push(x.days_since_last_release.to_string());
                }
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A labeled row read back from a feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub dependent: String,
    pub advisory_id: String,
    pub label: Option<Label>,
    pub features: FeatureVector,
}

pub fn read_feature_table<R: Read>(input: R) -> Result<Vec<TableRow>, String> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| format!("missing column {name:?}"));
    let dependent = col("dependent")?;
    let advisory = col("advisory_id")?;
    let label_col = col("label")?;
    let feature_cols = FeatureVector::NAMES.iter().map(|n| col(n)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let label = match &rec[label_col] {
            "" => None,
            "fast" => Some(Label::Fast),
            "slow" => Some(Label::Slow),
            other => return Err(format!("row {line}: unknown label {other:?}")),
        };
        let values = feature_cols
            .iter()
            .map(|&c| rec[c].parse::<f64>().map_err(|e| format!("row {line}, column {}: {e}", &headers[c])))
            .collect::<Result<Vec<_>, _>>()?;
        let features = FeatureVector::from_array(&values).map_err(|e| format!("row {line}: {e}"))?;
        rows.push(TableRow {
            dependent: rec[dependent].to_string(),
            advisory_id: rec[advisory].to_string(),
            label,
            features,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecosystem::test_support::*;
    use crate::ecosystem::SnapshotBuilder;
    use chrono::Duration;

    #[test]
    fn day_one_package() {
        let mut b = SnapshotBuilder::new();
        b.release(rel("p", "0.1.0", 5));
        let s = b.build().unwrap();
        let f = extract_features(&s, "p", day(5), StrategyClass::Balanced).unwrap();
        assert_eq!(f.package_age_days, 0.0);
        assert_eq!(f.release_frequency_per_month, 0.0);
        assert_eq!(f.dependency_modifications, 0);
        assert_eq!(f.release_status_post100, 0);
        assert_eq!((f.balanced, f.restrictive, f.permissive), (1, 0, 0));
        assert!(matches!(
            extract_features(&s, "p", day(4), StrategyClass::Balanced),
            Err(VulnError::NoReleases { .. })
        ));
    }

    #[test]
    fn frequency_arithmetic() {
        let mut b = SnapshotBuilder::new();
        for i in 0..10 {
            b.release(rel("p", &format!("1.0.{i}"), i * 20));
        }
        let s = b.build().unwrap();
        let at = day(0) + Duration::seconds(304 * 86_400 + 86_400 * 4 / 10);
        let f = extract_features(&s, "p", at, StrategyClass::Unclassified).unwrap();
        // 10 releases / (304.4 / 30.44) months
        assert!((f.release_frequency_per_month - 1.0).abs() < 1e-9);
        assert_eq!((f.balanced, f.restrictive, f.permissive), (0, 0, 0));
        assert_eq!(f.release_status_post100, 1);
    }

    #[test]
    fn counts_modifications_and_dependents() {
        let mut b = SnapshotBuilder::new();
        b.extend_releases([
            rel("a", "1.0.0", 0),
            rel("b", "1.0.0", 0),
            rel("p", "1.0.0", 1),
            rel("p", "1.0.1", 2),
            rel("p", "1.0.2", 3),
            rel("p", "1.0.3", 4),
            rel("p", "1.0.4", 5),
            rel("u1", "1.0.0", 3),
            rel("u2", "1.0.0", 3),
            rel("u2", "1.1.0", 9),
            rel("u3", "1.0.0", 50),
        ]);
        // p's dep maps: {a} {a} {a,b} {b} {b:^1.0.0 -> changed constraint}
        b.extend_deps([
            dep("p", "1.0.0", "a", "^1.0.0"),
            dep("p", "1.0.1", "a", "^1.0.0"),
            dep("p", "1.0.2", "a", "^1.0.0"),
            dep("p", "1.0.2", "b", "^1.0.0"),
            dep("p", "1.0.3", "b", "^1.0.0"),
            dep("p", "1.0.4", "b", "~1.0.0"),
            dep("u1", "1.0.0", "p", "^1.0.0"),
            dep("u2", "1.1.0", "p", "^1.0.0"),
            dep("u3", "1.0.0", "p", "^1.0.0"),
        ]);
        let s = b.build().unwrap();
        let f = extract_features(&s, "p", day(10), StrategyClass::Permissive).unwrap();
        assert_eq!(f.dependency_modifications, 3);
        assert_eq!(f.dependency_count, 1);
        assert_eq!(f.dependent_count, 2);
        assert_eq!(extract_features(&s, "p", day(5), StrategyClass::Permissive).unwrap().dependent_count, 1);
        let x = extract_extra_features(&s, "p", day(10)).unwrap();
        assert_eq!(x.package_version_count, 5);
        assert_eq!(x.days_since_last_release, 5.0);
    }

    #[test]
    fn array_round_trip_and_validation() {
        let f = FeatureVector {
            package_age_days: 12.5,
            balanced: 0,
            restrictive: 1,
            permissive: 0,
            release_frequency_per_month: 0.25,
            dependency_count: 3,
            dependent_count: 7,
            release_status_post100: 1,
            dependency_modifications: 2,
        };
        assert_eq!(FeatureVector::from_array(&f.to_array()).unwrap(), f);
        assert_eq!(f.strategy(), StrategyClass::Restrictive);
        let mut bad = f.to_array();
        bad[1] = 1.0;
        assert!(FeatureVector::from_array(&bad).is_err());
        bad[1] = 0.5;
        assert!(FeatureVector::from_array(&bad).is_err());
    }
}
