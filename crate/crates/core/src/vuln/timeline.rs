use std::collections::{BTreeMap, BTreeSet};

use chrono::Duration;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::{mann_whitney_u, mean, median, MannWhitney};
use super::strategy::{classify_constraint, StrategyClass};
use super::VulnError;
use crate::ecosystem::{days_between, registry_range, Advisory, Severity, Snapshot, Timestamp, SECONDS_PER_DAY};
use crate::semver::{diff_release_type, ReleaseType, Version};

/// A dependent whose resolved version was affected the day before the fix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VulnerableDependent {
    pub dependent: String,
    /// Dependent release current at the check date.
    pub dependent_version: Version,
    pub constraint: String,
    pub installed: Version,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExposureRecord {
    pub dependent: String,
    pub advisory_id: String,
    pub severity: Severity,
    pub vulnerable_check_date: Timestamp,
    pub dependent_version: Version,
    pub constraint: String,
    pub strategy: StrategyClass,
    pub installed_before_fix: Version,
    pub fix_delay_days: f64,
    pub adoption_date: Option<Timestamp>,
    pub adopted_version: Option<Version>,
    pub adoption_delay_days: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvisoryTimeline {
    pub advisory_id: String,
    pub package: String,
    pub severity: Severity,
    pub disclosed_at: Timestamp,
    pub fix_released_at: Timestamp,
    pub first_fixed: Version,
    pub fix_delay_days: f64,
    /// Absent when the package has no release before the fix.
    pub fix_release_type: Option<ReleaseType>,
    pub exposures: Vec<ExposureRecord>,
}

/// Set of severities to keep; empty keeps everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeverityFilter(BTreeSet<Severity>);

impl SeverityFilter {
    pub fn all() -> Self {
        SeverityFilter::default()
    }

    pub fn only(severities: impl IntoIterator<Item = Severity>) -> Self {
        SeverityFilter(severities.into_iter().collect())
    }

    pub fn matches(&self, s: Severity) -> bool {
        self.0.is_empty() || self.0.contains(&s)
    }
}

/// The moment the pre-fix constraint is evaluated: exactly one day before
/// the fix was published.
pub fn vulnerable_check_date(a: &Advisory) -> Timestamp {
    a.fix_released_at - Duration::seconds(SECONDS_PER_DAY)
}

pub fn fix_delay_days(a: &Advisory) -> f64 {
    // a fix published before disclosure has no delay
    days_between(a.disclosed_at, a.fix_released_at).max(0.0)
}

/// Release type of the fixing release relative to the release published
/// right before it.
pub fn fix_release_type(s: &Snapshot, a: &Advisory) -> Result<ReleaseType, VulnError> {
    let releases = s.releases(&a.package);
    let idx = releases
        .iter()
        .position(|r| r.version == a.first_fixed)
        .ok_or_else(|| VulnError::UnknownRelease { package: a.package.clone(), version: a.first_fixed.clone() })?;
    let prev = idx
        .checked_sub(1)
        .map(|i| &releases[i])
        .ok_or_else(|| VulnError::InsufficientHistory { advisory: a.id.clone(), package: a.package.clone() })?;
    Ok(diff_release_type(&prev.version, &a.first_fixed))
}

/// Version of `a.package` that `dependent`'s release current at `at` resolves to,
/// with the constraint used. None when that release does not depend on the
/// package at runtime, or the constraint is not a registry range, or
/// nothing satisfies it.
fn resolved_dependency(
    s: &Snapshot,
    dependent: &str,
    a: &Advisory,
    at: Timestamp,
) -> Option<(Version, String, Version)> {
    let (release, edges) = s.latest_release_at(dependent, at)?;
    let edge = edges.iter().find(|e| e.kind == crate::manifest::DepKind::Runtime && e.name == a.package)?;
    let range = registry_range(&edge.constraint)?;
    let installed = s.resolve_at(&a.package, &range, at)?;
    Some((release.version.clone(), edge.constraint.clone(), installed))
}

fn vulnerable_entry(s: &Snapshot, dependent: &str, a: &Advisory) -> Option<VulnerableDependent> {
    if dependent == a.package {
        return None;
    }
    let (dependent_version, constraint, installed) = resolved_dependency(s, dependent, a, vulnerable_check_date(a))?;
    a.affected.satisfies(&installed, true).then(|| VulnerableDependent {
        dependent: dependent.to_string(),
        dependent_version,
        constraint,
        installed,
    })
}

pub fn find_vulnerable_dependents(s: &Snapshot, a: &Advisory) -> Vec<VulnerableDependent> {
    s.dependents_of(&a.package).iter().filter_map(|d| vulnerable_entry(s, d, a)).collect()
}

fn exposure(s: &Snapshot, v: VulnerableDependent, a: &Advisory) -> ExposureRecord {
    let fix_at = a.fix_released_at;
    let later = s.releases(&v.dependent).iter().map(|r| r.published_at).filter(|t| *t > fix_at);
    let events: BTreeSet<Timestamp> = std::iter::once(fix_at).chain(later).collect();
    let adoption = events.into_iter().find_map(|t| {
        // a release that drops the dependency counts as not adopted
        let (_, _, installed) = resolved_dependency(s, &v.dependent, a, t)?;
        (installed >= a.first_fixed).then_some((t, installed))
    });
    let (adoption_date, adopted_version, end) = match adoption {
        Some((t, ver)) => (Some(t), Some(ver), t),
        None => (None, None, s.horizon()),
    };
    ExposureRecord {
        strategy: classify_constraint(&v.constraint),
        advisory_id: a.id.clone(),
        severity: a.severity,
        vulnerable_check_date: vulnerable_check_date(a),
        fix_delay_days: fix_delay_days(a),
        censored: adoption_date.is_none(),
        adoption_delay_days: days_between(fix_at, end).max(0.0),
        adoption_date,
        adopted_version,
        dependent: v.dependent,
        dependent_version: v.dependent_version,
        constraint: v.constraint,
        installed_before_fix: v.installed,
    }
}

/// First event at which `dependent` resolves the fixed version or higher;
/// censored at the snapshot horizon if that never happens.
pub fn adoption_delay(s: &Snapshot, dependent: &str, a: &Advisory) -> Result<ExposureRecord, VulnError> {
    let v = vulnerable_entry(s, dependent, a)
        .ok_or_else(|| VulnError::NotVulnerable { dependent: dependent.to_string(), advisory: a.id.clone() })?;
    Ok(exposure(s, v, a))
}

pub fn analyze_advisory(s: &Snapshot, a: &Advisory) -> AdvisoryTimeline {
    let exposures = find_vulnerable_dependents(s, a).into_par_iter().map(|v| exposure(s, v, a)).collect();
    AdvisoryTimeline {
        advisory_id: a.id.clone(),
        package: a.package.clone(),
        severity: a.severity,
        disclosed_at: a.disclosed_at,
        fix_released_at: a.fix_released_at,
        first_fixed: a.first_fixed.clone(),
        fix_delay_days: fix_delay_days(a),
        fix_release_type: fix_release_type(s, a).ok(),
        exposures,
    }
}

/// Timelines for every advisory passing `filter`, in snapshot order.
pub fn analyze_timelines(s: &Snapshot, filter: &SeverityFilter) -> Vec<AdvisoryTimeline> {
    s.advisories().par_iter().filter(|a| filter.matches(a.severity)).map(|a| analyze_advisory(s, a)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Center {
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

impl Center {
    fn of(xs: &[f64]) -> Self {
        Center { mean: mean(xs), median: median(xs) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    /// Severity name, or "all".
    pub group: String,
    pub advisories: usize,
    pub exposures: usize,
    pub adopted: usize,
    pub censored: usize,
    pub fix_delay_days: Center,
    pub adoption_delay_days: Center,
    pub fix_release_types: BTreeMap<ReleaseType, usize>,
    /// Share of classified fixes shipped in a minor or major release.
    pub minor_or_major_share: Option<f64>,
    /// Fix delays against adoption delays.
    pub fix_vs_adoption: Option<MannWhitney>,
}

fn summarize_group(group: String, timelines: &[&AdvisoryTimeline]) -> GroupSummary {
    let fix: Vec<f64> = timelines.iter().map(|t| t.fix_delay_days).collect();
    let exposures: Vec<&ExposureRecord> = timelines.iter().flat_map(|t| &t.exposures).collect();
    let adoption: Vec<f64> = exposures.iter().map(|e| e.adoption_delay_days).collect();
    let mut types = BTreeMap::new();
    for t in timelines {
        if let Some(rt) = t.fix_release_type {
            *types.entry(rt).or_insert(0) += 1;
        }
    }
    let classified: usize = types.values().sum();
    let wide = types.get(&ReleaseType::Minor).unwrap_or(&0) + types.get(&ReleaseType::Major).unwrap_or(&0);
    let censored = exposures.iter().filter(|e| e.censored).count();
    GroupSummary {
        group,
        advisories: timelines.len(),
        exposures: exposures.len(),
        adopted: exposures.len() - censored,
        censored,
        fix_delay_days: Center::of(&fix),
        adoption_delay_days: Center::of(&adoption),
        fix_release_types: types,
        minor_or_major_share: (classified > 0).then(|| wide as f64 / classified as f64),
        fix_vs_adoption: mann_whitney_u(&fix, &adoption).ok(),
    }
}

/// One summary over all timelines followed by one per severity present.
pub fn summarize(timelines: &[AdvisoryTimeline]) -> Vec<GroupSummary> {
    let all: Vec<&AdvisoryTimeline> = timelines.iter().collect();
    let mut out = vec![summarize_group("all".into(), &all)];
    for sev in Severity::ALL {
        let group: Vec<&AdvisoryTimeline> = timelines.iter().filter(|t| t.severity == sev).collect();
        if !group.is_empty() {
            out.push(summarize_group(sev.to_string(), &group));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecosystem::test_support::*;
    use crate::ecosystem::{AdvisoryRecord, SnapshotBuilder};

    fn advisory(id: &str, pkg: &str, affected: &str, fixed: &str, disclosed: i64) -> AdvisoryRecord {
        AdvisoryRecord {
            id: id.into(),
            package: pkg.into(),
            severity: Severity::High,
            affected: affected.into(),
            first_fixed: fixed.parse().unwrap(),
            disclosed_at: day(disclosed),
            fix_released_at: None,
        }
    }

    // lib: 1.0.0 (d0), 1.0.1 (d10, fix)
    // caret: ^1.0.0 from d1
    // pinned: 1.0.0 from d1, moves to 1.0.1 at d40
    // stuck: 1.0.0 from d1 forever
    // late: first published after the fix
    fn fixture() -> Snapshot {
        let mut b = SnapshotBuilder::new();
        b.extend_releases([
            rel("lib", "1.0.0", 0),
            rel("lib", "1.0.1", 10),
            rel("caret", "1.0.0", 1),
            rel("pinned", "1.0.0", 1),
            rel("pinned", "1.1.0", 20),
            rel("pinned", "1.2.0", 40),
            rel("stuck", "2.0.0", 1),
            rel("late", "1.0.0", 12),
        ]);
        b.extend_deps([
            dep("caret", "1.0.0", "lib", "^1.0.0"),
            dep("pinned", "1.0.0", "lib", "1.0.0"),
            dep("pinned", "1.1.0", "lib", "1.0.0"),
            dep("pinned", "1.2.0", "lib", "1.0.1"),
            dep("stuck", "2.0.0", "lib", "1.0.0"),
            dep("late", "1.0.0", "lib", "1.0.0"),
        ]);
        b.advisory(advisory("A1", "lib", "<1.0.1", "1.0.1", 4));
        b.horizon(day(100));
        b.build().unwrap()
    }

    #[test]
    fn vulnerable_dependents() {
        let s = fixture();
        let a = s.advisory("A1").unwrap();
        let names: Vec<_> = find_vulnerable_dependents(&s, a).into_iter().map(|v| v.dependent).collect();
        assert_eq!(names, ["caret", "pinned", "stuck"]);
    }

    #[test]
    fn adoption_cases() {
        let s = fixture();
        let a = s.advisory("A1").unwrap();
        let caret = adoption_delay(&s, "caret", a).unwrap();
        assert_eq!(caret.adoption_delay_days, 0.0);
        assert_eq!(caret.adopted_version, Some(Version::new(1, 0, 1)));
        assert_eq!(caret.fix_delay_days, 6.0);
        assert_eq!(caret.strategy, StrategyClass::Balanced);
        let pinned = adoption_delay(&s, "pinned", a).unwrap();
        assert_eq!(pinned.adoption_delay_days, 30.0);
        assert_eq!(pinned.adoption_date, Some(day(40)));
        assert!(!pinned.censored);
        let stuck = adoption_delay(&s, "stuck", a).unwrap();
        assert!(stuck.censored);
        assert_eq!(stuck.adoption_date, None);
        assert_eq!(stuck.adoption_delay_days, 90.0);
        assert!(matches!(adoption_delay(&s, "late", a), Err(VulnError::NotVulnerable { .. })));
    }

    #[test]
    fn release_type_of_fix() {
        let s = fixture();
        assert_eq!(fix_release_type(&s, s.advisory("A1").unwrap()).unwrap(), ReleaseType::Patch);

        let mut b = SnapshotBuilder::new();
        b.release(rel("solo", "1.0.0", 0));
        b.advisory(advisory("A2", "solo", "<1.0.0-0", "1.0.0", 0));
        let s = b.build().unwrap();
        let a = s.advisory("A2").unwrap();
        assert!(matches!(fix_release_type(&s, a), Err(VulnError::InsufficientHistory { .. })));
    }

    #[test]
    fn fix_delay_is_zero_for_simultaneous_disclosure() {
        let s = fixture();
        let mut a = s.advisory("A1").unwrap().clone();
        a.disclosed_at = a.fix_released_at;
        assert_eq!(fix_delay_days(&a), 0.0);
        a.disclosed_at = a.fix_released_at + Duration::days(3);
        assert_eq!(fix_delay_days(&a), 0.0);
    }

    #[test]
    fn summary_groups() {
        let s = fixture();
        let t = analyze_timelines(&s, &SeverityFilter::all());
        let sum = summarize(&t);
        assert_eq!(sum[0].group, "all");
        assert_eq!(sum[0].exposures, 3);
        assert_eq!(sum[0].censored, 1);
        assert_eq!(sum[0].adoption_delay_days.median, Some(30.0));
        assert_eq!(sum[0].minor_or_major_share, Some(0.0));
        assert_eq!(sum[1].group, "high");
        assert!(analyze_timelines(&s, &SeverityFilter::only([Severity::Low])).is_empty());
    }
}
