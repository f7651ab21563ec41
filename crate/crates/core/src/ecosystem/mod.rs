//! Time-stamped ecosystem snapshots: releases, dependency edges and
//! advisories, with as-of-date resolution.

pub mod registry;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::{classify_spec, DepKind};
use crate::semver::{max_satisfying, parse_range, RangeExpr, Version};

pub type Timestamp = DateTime<Utc>;

pub const SECONDS_PER_DAY: i64 = 86_400;

/// `(later - earlier)` in fractional days.
pub fn days_between(earlier: Timestamp, later: Timestamp) -> f64 {
    (later - earlier).num_seconds() as f64 / SECONDS_PER_DAY as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    #[serde(alias = "moderate")]
    Medium,
    High,
    Critical,
}

impl Severity {
    pub const ALL: [Severity; 4] = [Severity::Critical, Severity::High, Severity::Medium, Severity::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
            Severity::Critical => "critical",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Severity::Low),
            "medium" | "moderate" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            "critical" => Ok(Severity::Critical),
            other => Err(format!("unknown severity {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Release {
    pub version: Version,
    pub published_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DepEdge {
    pub name: String,
    pub constraint: String,
    pub kind: DepKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advisory {
    pub id: String,
    pub package: String,
    pub severity: Severity,
    pub affected: RangeExpr,
    pub first_fixed: Version,
    pub disclosed_at: Timestamp,
    pub fix_released_at: Timestamp,
}

/// One line of the releases file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseRecord {
    pub package: String,
    pub version: Version,
    pub published_at: Timestamp,
}

/// One line of the deps file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepRecord {
    pub package: String,
    pub version: Version,
    pub dep_name: String,
    pub constraint: String,
    pub kind: DepKind,
}

/// One line of the advisories file. `fix_released_at` may be omitted, in
/// which case it is taken from the publish time of `first_fixed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvisoryRecord {
    pub id: String,
    pub package: String,
    pub severity: Severity,
    pub affected: String,
    pub first_fixed: Version,
    pub disclosed_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fix_released_at: Option<Timestamp>,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("release {package}@{version} is listed twice")]
    DuplicateRelease { package: String, version: Version },
    #[error("dependency edge from {package}@{version} has no matching release")]
    DanglingEdge { package: String, version: Version },
    #[error("advisory {id} references unknown package {package}")]
    UnknownAdvisoryPackage { id: String, package: String },
    #[error("advisory {id}: first fixed version {version} is not a release of {package}")]
    UnknownFixRelease { id: String, package: String, version: Version },
    #[error("advisory {id}: affected range {affected:?} is not a valid range")]
    InvalidAffectedRange { id: String, affected: String },
    #[error("advisory {id}: first fixed version {version} satisfies the affected range")]
    FixIsAffected { id: String, version: Version },
    #[error("advisory {id}: fix_released_at {given} differs from the publish time {published} of {version}")]
    FixTimeMismatch { id: String, version: Version, given: Timestamp, published: Timestamp },
    #[error("duplicate advisory id {0}")]
    DuplicateAdvisory(String),
    #[error("horizon {horizon} precedes release {package}@{version} published {published}")]
    HorizonBeforeRelease { horizon: Timestamp, package: String, version: Version, published: Timestamp },
    #[error("snapshot contains no releases")]
    Empty,
}

/// Immutable, fully validated ecosystem snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    releases: BTreeMap<String, Vec<Release>>,
    dep_edges: BTreeMap<(String, Version), Vec<DepEdge>>,
    advisories: Vec<Advisory>,
    horizon: Timestamp,
    // runtime dependency name -> packages with at least one runtime edge to it
    reverse_runtime: BTreeMap<String, BTreeSet<String>>,
}

impl Snapshot {
    pub fn horizon(&self) -> Timestamp {
        self.horizon
    }

    pub fn advisories(&self) -> &[Advisory] {
        &self.advisories
    }

    pub fn advisory(&self, id: &str) -> Option<&Advisory> {
        self.advisories.iter().find(|a| a.id == id)
    }

    pub fn packages(&self) -> impl Iterator<Item = &str> {
        self.releases.keys().map(String::as_str)
    }

    /// Releases of `pkg` ordered by publish time (ties by version).
    pub fn releases(&self, pkg: &str) -> &[Release] {
        self.releases.get(pkg).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn release_count(&self) -> usize {
        self.releases.values().map(Vec::len).sum()
    }

    pub fn edges(&self, pkg: &str, version: &Version) -> &[DepEdge] {
        self.dep_edges.get(&(pkg.to_string(), version.clone())).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn runtime_edges<'a>(&'a self, pkg: &str, version: &Version) -> impl Iterator<Item = &'a DepEdge> + 'a {
        self.edges(pkg, version).iter().filter(|e| e.kind == DepKind::Runtime)
    }

    /// The release with the greatest publish time `<= at`; among releases
    /// sharing that timestamp the highest version wins.
    pub fn latest_release_at(&self, pkg: &str, at: Timestamp) -> Option<(&Release, &[DepEdge])> {
        let releases = self.releases(pkg);
        let idx = releases.partition_point(|r| r.published_at <= at);
        let release = releases.get(idx.checked_sub(1)?)?;
        Some((release, self.edges(pkg, &release.version)))
    }

    /// Highest release of `pkg` published by `at` that satisfies `range`.
    pub fn resolve_at(&self, pkg: &str, range: &RangeExpr, at: Timestamp) -> Option<Version> {
        let releases = self.releases(pkg);
        let idx = releases.partition_point(|r| r.published_at <= at);
        max_satisfying(releases[..idx].iter().map(|r| &r.version), range, false).cloned()
    }

    /// Packages with at least one runtime dependency edge naming `pkg`.
    pub fn dependents_of(&self, pkg: &str) -> BTreeSet<String> {
        self.reverse_runtime.get(pkg).cloned().unwrap_or_default()
    }

    pub fn release_records(&self) -> Vec<ReleaseRecord> {
        self.releases
            .iter()
            .flat_map(|(package, releases)| {
                releases.iter().map(move |r| ReleaseRecord {
                    package: package.clone(),
                    version: r.version.clone(),
                    published_at: r.published_at,
                })
            })
            .collect()
    }

    pub fn dep_records(&self) -> Vec<DepRecord> {
        self.dep_edges
            .iter()
            .flat_map(|((package, version), edges)| {
                edges.iter().map(move |e| DepRecord {
                    package: package.clone(),
                    version: version.clone(),
                    dep_name: e.name.clone(),
                    constraint: e.constraint.clone(),
                    kind: e.kind,
                })
            })
            .collect()
    }

    pub fn advisory_records(&self) -> Vec<AdvisoryRecord> {
        self.advisories
            .iter()
            .map(|a| AdvisoryRecord {
                id: a.id.clone(),
                package: a.package.clone(),
                severity: a.severity,
                affected: a.affected.raw().to_string(),
                first_fixed: a.first_fixed.clone(),
                disclosed_at: a.disclosed_at,
                fix_released_at: Some(a.fix_released_at),
            })
            .collect()
    }

    /// Writes the three interchange files.
    pub fn write_files(&self, releases: &Path, deps: &Path, advisories: &Path) -> Result<(), SnapshotError> {
        write_jsonl(releases, &self.release_records())?;
        write_jsonl(deps, &self.dep_records())?;
        write_jsonl(advisories, &self.advisory_records())
    }
}

/// Accumulates records and validates them into a [`Snapshot`].
#[derive(Debug, Clone, Default)]
pub struct SnapshotBuilder {
    releases: Vec<ReleaseRecord>,
    deps: Vec<DepRecord>,
    advisories: Vec<AdvisoryRecord>,
    horizon: Option<Timestamp>,
}

impl SnapshotBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn release(&mut self, record: ReleaseRecord) -> &mut Self {
        self.releases.push(record);
        self
    }

    pub fn dep(&mut self, record: DepRecord) -> &mut Self {
        self.deps.push(record);
        self
    }

    pub fn advisory(&mut self, record: AdvisoryRecord) -> &mut Self {
        self.advisories.push(record);
        self
    }

    /// Overrides the horizon (defaults to the latest publish time).
    pub fn horizon(&mut self, at: Timestamp) -> &mut Self {
        self.horizon = Some(at);
        self
    }

    pub fn extend_releases(&mut self, records: impl IntoIterator<Item = ReleaseRecord>) -> &mut Self {
        self.releases.extend(records);
        self
    }

    pub fn extend_deps(&mut self, records: impl IntoIterator<Item = DepRecord>) -> &mut Self {
        self.deps.extend(records);
        self
    }

    pub fn extend_advisories(&mut self, records: impl IntoIterator<Item = AdvisoryRecord>) -> &mut Self {
        self.advisories.extend(records);
        self
    }

    pub fn build(&self) -> Result<Snapshot, SnapshotError> {
        let mut releases: BTreeMap<String, Vec<Release>> = BTreeMap::new();
        for r in &self.releases {
            let list = releases.entry(r.package.clone()).or_default();
            if list.iter().any(|x| x.version == r.version) {
                return Err(SnapshotError::DuplicateRelease { package: r.package.clone(), version: r.version.clone() });
            }
            list.push(Release { version: r.version.clone(), published_at: r.published_at });
        }
        for list in releases.values_mut() {
            list.sort_by(|a, b| a.published_at.cmp(&b.published_at).then_with(|| a.version.cmp(&b.version)));
        }
        let latest = releases.values().flatten().map(|r| r.published_at).max().ok_or(SnapshotError::Empty)?;
        let horizon = self.horizon.unwrap_or(latest);
        if horizon < latest {
            let (package, release) = releases
                .iter()
                .flat_map(|(p, rs)| rs.iter().map(move |r| (p, r)))
                .find(|(_, r)| r.published_at > horizon)
                .expect("some release is after the horizon");
            return Err(SnapshotError::HorizonBeforeRelease {
                horizon,
                package: package.clone(),
                version: release.version.clone(),
                published: release.published_at,
            });
        }

        let mut dep_edges: BTreeMap<(String, Version), Vec<DepEdge>> = BTreeMap::new();
        let mut reverse_runtime: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for d in &self.deps {
            let known = releases.get(&d.package).is_some_and(|rs| rs.iter().any(|r| r.version == d.version));
            if !known {
                return Err(SnapshotError::DanglingEdge { package: d.package.clone(), version: d.version.clone() });
            }
            dep_edges.entry((d.package.clone(), d.version.clone())).or_default().push(DepEdge {
                name: d.dep_name.clone(),
                constraint: d.constraint.clone(),
                kind: d.kind,
            });
            if d.kind == DepKind::Runtime {
                reverse_runtime.entry(d.dep_name.clone()).or_default().insert(d.package.clone());
            }
        }
        for edges in dep_edges.values_mut() {
            edges.sort();
        }

        let mut advisories = Vec::with_capacity(self.advisories.len());
        let mut seen = BTreeSet::new();
        for a in &self.advisories {
            if !seen.insert(a.id.clone()) {
                return Err(SnapshotError::DuplicateAdvisory(a.id.clone()));
            }
            let Some(pkg_releases) = releases.get(&a.package) else {
                return Err(SnapshotError::UnknownAdvisoryPackage { id: a.id.clone(), package: a.package.clone() });
            };
            let Some(fix) = pkg_releases.iter().find(|r| r.version == a.first_fixed) else {
                return Err(SnapshotError::UnknownFixRelease {
                    id: a.id.clone(),
                    package: a.package.clone(),
                    version: a.first_fixed.clone(),
                });
            };
            let affected = parse_range(&a.affected)
                .map_err(|_| SnapshotError::InvalidAffectedRange { id: a.id.clone(), affected: a.affected.clone() })?;
            if affected.satisfies(&a.first_fixed, true) {
                return Err(SnapshotError::FixIsAffected { id: a.id.clone(), version: a.first_fixed.clone() });
            }
            let fix_released_at = a.fix_released_at.unwrap_or(fix.published_at);
            if fix_released_at != fix.published_at {
                return Err(SnapshotError::FixTimeMismatch {
                    id: a.id.clone(),
                    version: a.first_fixed.clone(),
                    given: fix_released_at,
                    published: fix.published_at,
                });
            }
            advisories.push(Advisory {
                id: a.id.clone(),
                package: a.package.clone(),
                severity: a.severity,
                affected,
                first_fixed: a.first_fixed.clone(),
                disclosed_at: a.disclosed_at,
                fix_released_at,
            });
        }

        Ok(Snapshot { releases, dep_edges, advisories, horizon, reverse_runtime })
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, SnapshotError> {
    let file = File::open(path).map_err(|source| SnapshotError::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| SnapshotError::Io { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| SnapshotError::Malformed {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), SnapshotError> {
    let io_err = |source| SnapshotError::Io { path: path.to_path_buf(), source };
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).map_err(|e| io_err(e.into()))?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf).map_err(io_err)
}

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut file = File::create(&tmp)?;
    file.write_all(bytes)?;
    file.sync_all()?;
    std::fs::rename(&tmp, path)
}

/// Loads and validates a snapshot from the three line-delimited files.
pub fn load_snapshot(
    releases_file: &Path,
    deps_file: &Path,
    advisories_file: &Path,
) -> Result<Snapshot, SnapshotError> {
    load_snapshot_with_horizon(releases_file, deps_file, advisories_file, None)
}

pub fn load_snapshot_with_horizon(
    releases_file: &Path,
    deps_file: &Path,
    advisories_file: &Path,
    horizon: Option<Timestamp>,
) -> Result<Snapshot, SnapshotError> {
    let mut builder = SnapshotBuilder::new();
    builder
        .extend_releases(read_jsonl::<ReleaseRecord>(releases_file)?)
        .extend_deps(read_jsonl::<DepRecord>(deps_file)?)
        .extend_advisories(read_jsonl::<AdvisoryRecord>(advisories_file)?);
    if let Some(h) = horizon {
        builder.horizon(h);
    }
    builder.build()
}

/// Whether a dependency constraint takes part in resolution (registry ranges
/// only; url/git/file/tag edges are kept but never resolved).
pub fn registry_range(constraint: &str) -> Option<RangeExpr> {
    classify_spec(constraint).range().cloned()
}
