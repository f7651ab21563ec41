use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::bail;
use depsmell::smell::{lint_project, LintOptions, LintOutcome, Smell};
use serde::Serialize;

use crate::args::LintArgs;
use crate::config::LintConfig;
use crate::report::Output;

#[derive(Serialize)]
struct Summary {
    findings: usize,
    failing: usize,
    by_smell: BTreeMap<Smell, usize>,
}

#[derive(Serialize)]
struct Payload {
    project: String,
    fail_on: Vec<Smell>,
    #[serde(flatten)]
    outcome: LintOutcome,
}

fn parse_smells(ids: &[String]) -> anyhow::Result<Vec<Smell>> {
    ids.iter()
        .map(|id| match Smell::from_id(id.trim()) {
            Some(s) => Ok(s),
            None => bail!("unknown smell {id:?} (expected S1 to S7)"),
        })
        .collect()
}

pub fn run(args: &LintArgs, cfg: &LintConfig, out: &Output) -> anyhow::Result<u8> {
    let defaults = LintOptions::default();
    let extensions = if !args.extensions.is_empty() {
        args.extensions.clone()
    } else {
        cfg.extensions.clone().unwrap_or(defaults.extensions)
    };
    let options = LintOptions {
        include_dev_optional: args.include_dev || cfg.include_dev.unwrap_or(false),
        check_lockfile: !args.no_lockfile_check && cfg.check_lockfile.unwrap_or(true),
        check_imports: !args.no_imports && cfg.check_imports.unwrap_or(true),
        source_root: args.src.clone(),
        extensions,
    };
    let fail_on = if !args.fail_on.is_empty() {
        parse_smells(&args.fail_on)?
    } else if let Some(ids) = &cfg.fail_on {
        parse_smells(ids)?
    } else {
        Smell::ALL.to_vec()
    };

    let outcome = lint_project(&args.path, &options)?;
    let failing = outcome.findings.iter().filter(|f| fail_on.contains(&f.smell)).count();
    let mut by_smell = BTreeMap::new();
    for f in &outcome.findings {
        *by_smell.entry(f.smell).or_insert(0) += 1;
    }
    let summary = Summary { findings: outcome.findings.len(), failing, by_smell };
    let payload = Payload { project: args.path.display().to_string(), fail_on, outcome };
    out.emit("lint", summary, payload, render)?;
    Ok(if failing > 0 { 1 } else { 0 })
}

fn render(summary: &Summary, p: &Payload) -> String {
    let mut s = String::new();
    for f in &p.outcome.findings {
        let dep = f.dependency.as_deref().unwrap_or("-");
        let _ = writeln!(s, "{}  {:<20} {:<24} {}", f.smell.id(), f.smell.title(), dep, f.message);
        if !f.evidence.is_empty() {
            let _ = writeln!(s, "      {}", f.evidence);
        }
    }
    for w in &p.outcome.manifest_warnings {
        let _ = writeln!(s, "warning: {} {}: {}", w.section, w.dependency, w.message);
    }
    for n in &p.outcome.notices {
        let _ = writeln!(s, "note: {n}");
    }
    if summary.findings == 0 {
        let _ = writeln!(s, "{}: no dependency smells", p.project);
    } else {
        let _ = writeln!(s, "{}: {} finding(s), {} failing", p.project, summary.findings, summary.failing);
    }
    s
}
