use std::fmt::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use depsmell::ecosystem::{load_snapshot_with_horizon, Severity, Snapshot, Timestamp};
use depsmell::model::LabelConfig;
use depsmell::vuln::stats::{correlated_pairs, CorrelatedPair};
use depsmell::vuln::{
    analyze_advisory, analyze_timelines, build_dataset, summarize, write_feature_table, AdvisoryTimeline,
    DatasetOptions, DatasetRecord, FeatureVector, GroupSummary, SeverityFilter,
};
use serde::Serialize;

use crate::args::{FeaturesArgs, LabelArgs, SnapshotArgs, TimelineArgs};
use crate::config::Config;
use crate::report::{fmt_opt, write_records, Output};

fn resolve(explicit: &Option<PathBuf>, dir: &Option<PathBuf>, name: &str) -> anyhow::Result<PathBuf> {
    match (explicit, dir) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(d)) => Ok(d.join(name)),
        (None, None) => bail!("no {name}: pass --snapshot DIR or --{}", name.trim_end_matches(".jsonl")),
    }
}

pub fn load(args: &SnapshotArgs) -> anyhow::Result<Snapshot> {
    let releases = resolve(&args.releases, &args.snapshot, "releases.jsonl")?;
    let deps = resolve(&args.deps, &args.snapshot, "deps.jsonl")?;
    let advisories = resolve(&args.advisories, &args.snapshot, "advisories.jsonl")?;
    let horizon = args
        .horizon
        .as_deref()
        .map(|h| {
            chrono::DateTime::parse_from_rfc3339(h)
                .map(|t| t.with_timezone(&chrono::Utc))
                .with_context(|| format!("--horizon {h:?} is not an RFC 3339 timestamp"))
        })
        .transpose()?;
    Ok(load_snapshot_with_horizon(&releases, &deps, &advisories, horizon)?)
}

pub fn severity_filter(levels: &[String]) -> anyhow::Result<SeverityFilter> {
    let parsed =
        levels.iter().map(|l| l.parse::<Severity>().map_err(anyhow::Error::msg)).collect::<Result<Vec<_>, _>>()?;
    Ok(SeverityFilter::only(parsed))
}

#[derive(Serialize)]
struct TimelineSummary {
    advisories: usize,
    exposures: usize,
    adopted: usize,
    censored: usize,
}

#[derive(Serialize)]
struct TimelinePayload {
    horizon: Timestamp,
    advisories: Vec<AdvisoryTimeline>,
    statistics: Vec<GroupSummary>,
}

pub fn timeline(args: &TimelineArgs, out: &Output) -> anyhow::Result<u8> {
    let s = load(&args.snapshot)?;
    let filter = severity_filter(&args.snapshot.severity)?;
    let timelines = match &args.advisory {
        Some(id) => {
            let a = s.advisory(id).with_context(|| format!("unknown advisory {id:?}"))?;
            if filter.matches(a.severity) {
                vec![analyze_advisory(&s, a)]
            } else {
                Vec::new()
            }
        }
        None => analyze_timelines(&s, &filter),
    };
    if let Some(path) = &args.records {
        write_records(path, timelines.iter().flat_map(|t| &t.exposures))?;
    }
    let statistics = summarize(&timelines);
    let all = &statistics[0];
    let summary = TimelineSummary {
        advisories: all.advisories,
        exposures: all.exposures,
        adopted: all.adopted,
        censored: all.censored,
    };
    let payload = TimelinePayload { horizon: s.horizon(), advisories: timelines, statistics };
    out.emit("timeline", summary, payload, render_timeline)?;
    Ok(0)
}

fn render_timeline(summary: &TimelineSummary, p: &TimelinePayload) -> String {
    let mut s = String::new();
    for t in &p.advisories {
        let rt = t.fix_release_type.map(|r| r.to_string()).unwrap_or_else(|| "unknown".into());
        let _ = writeln!(
            s,
            "{} {} ({}) fixed in {} [{}], fix delay {:.2} d, {} exposed",
            t.advisory_id,
            t.package,
            t.severity,
            t.first_fixed,
            rt,
            t.fix_delay_days,
            t.exposures.len()
        );
        for e in &t.exposures {
            let status = match &e.adopted_version {
                Some(v) => format!("adopted {v} after {:.2} d", e.adoption_delay_days),
                None => format!("censored at {:.2} d", e.adoption_delay_days),
            };
            let _ = writeln!(
                s,
                "  {}@{} {:?} ({}) installed {}: {}",
                e.dependent, e.dependent_version, e.constraint, e.strategy, e.installed_before_fix, status
            );
        }
    }
    for g in &p.statistics {
        let _ = writeln!(
            s,
            "[{}] advisories {} exposures {} censored {} | fix delay mean {} median {} | adoption delay mean {} median {} | minor+major share {}",
            g.group,
            g.advisories,
            g.exposures,
            g.censored,
            fmt_opt(g.fix_delay_days.mean),
            fmt_opt(g.fix_delay_days.median),
            fmt_opt(g.adoption_delay_days.mean),
            fmt_opt(g.adoption_delay_days.median),
            fmt_opt(g.minor_or_major_share),
        );
        if let Some(mw) = &g.fix_vs_adoption {
            let _ = writeln!(s, "    Mann-Whitney U {:.1}, p = {:.4}", mw.u, mw.p_two_sided);
        }
    }
    let _ = writeln!(
        s,
        "{} advisories, {} exposures ({} censored)",
        summary.advisories, summary.exposures, summary.censored
    );
    s
}

pub fn label_config(args: &LabelArgs, cfg: &Config) -> anyhow::Result<LabelConfig> {
    let d = LabelConfig::default();
    let labels = LabelConfig {
        fast_below_days: args.fast_below.or(cfg.labels.fast_below_days).unwrap_or(d.fast_below_days),
        slow_above_days: args.slow_above.or(cfg.labels.slow_above_days).unwrap_or(d.slow_above_days),
    };
    labels.validate().map_err(anyhow::Error::msg)?;
    Ok(labels)
}

#[derive(Serialize)]
struct FeaturesSummary {
    records: usize,
    fast: usize,
    slow: usize,
    unlabeled: usize,
    correlated_pairs: usize,
}

#[derive(Serialize)]
struct FeaturesPayload {
    labels: LabelConfig,
    table: Option<String>,
    correlation_threshold: f64,
    correlated_pairs: Vec<CorrelatedPair>,
    records: Vec<DatasetRecord>,
}

pub fn features(args: &FeaturesArgs, cfg: &Config, out: &Output) -> anyhow::Result<u8> {
    let labels = label_config(&args.labels, cfg)?;
    let threshold = args.correlation_threshold.or(cfg.features.correlation_threshold).unwrap_or(0.7);
    let s = load(&args.snapshot)?;
    let filter = severity_filter(&args.snapshot.severity)?;
    let timelines = analyze_timelines(&s, &filter);
    let records = build_dataset(&s, &timelines, &DatasetOptions { labels, include_extras: args.with_dropped })?;
    if let Some(path) = &args.table {
        let mut buf = Vec::new();
        write_feature_table(&records, &mut buf)?;
        depsmell::ecosystem::write_atomic(path, &buf).with_context(|| format!("writing {}", path.display()))?;
    }
    let labeled: Vec<&DatasetRecord> = records.iter().filter(|r| r.label.is_some()).collect();
    let columns: Vec<Vec<f64>> =
        (0..FeatureVector::NAMES.len()).map(|j| labeled.iter().map(|r| r.features.to_array()[j]).collect()).collect();
    let pairs =
        if labeled.len() >= 2 { correlated_pairs(&FeatureVector::NAMES, &columns, threshold)? } else { Vec::new() };
    let count = |l| records.iter().filter(|r| r.label == Some(l)).count();
    let summary = FeaturesSummary {
        records: records.len(),
        fast: count(depsmell::model::Label::Fast),
        slow: count(depsmell::model::Label::Slow),
        unlabeled: records.iter().filter(|r| r.label.is_none()).count(),
        correlated_pairs: pairs.len(),
    };
    let payload = FeaturesPayload {
        labels,
        table: args.table.as_ref().map(|p| p.display().to_string()),
        correlation_threshold: threshold,
        correlated_pairs: pairs,
        records,
    };
    out.emit("features", summary, payload, |sum, p| {
        let mut s = String::new();
        for r in &p.records {
            let label = r.label.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<24} {:<12} {:>8.2} d {:<5} {:?}",
                r.dependent,
                r.advisory_id,
                r.adoption_delay_days,
                label,
                r.features.to_array()
            );
        }
        for c in &p.correlated_pairs {
            let _ = writeln!(s, "correlated: {} ~ {} (rho {:.3})", c.a, c.b, c.rho);
        }
        let _ =
            writeln!(s, "{} records: {} fast, {} slow, {} unlabeled", sum.records, sum.fast, sum.slow, sum.unlabeled);
        s
    })?;
    Ok(0)
}
