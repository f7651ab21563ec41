use anyhow::Context;
use depsmell::ecosystem::registry::RegistryClient;
use depsmell::ecosystem::{write_jsonl, AdvisoryRecord, SnapshotBuilder};
use serde::Serialize;

use crate::args::FetchArgs;
use crate::config::Config;
use crate::report::Output;

#[derive(Serialize)]
struct Summary {
    packages: usize,
    releases: usize,
    deps: usize,
}

#[derive(Serialize)]
struct Payload {
    registry: String,
    out_dir: String,
    packages: Vec<String>,
}

pub fn run(args: &FetchArgs, cfg: &Config, out: &Output) -> anyhow::Result<u8> {
    let client = RegistryClient::from_env(args.registry.as_deref().or(cfg.registry.as_deref()), args.offline);
    let mut releases = Vec::new();
    let mut deps = Vec::new();
    if !args.packages.is_empty() {
        // everything is fetched before anything is written
        for name in &args.packages {
            let data = client.fetch_packument(name)?;
            releases.extend(data.releases);
            deps.extend(data.deps);
        }
        SnapshotBuilder::new()
            .extend_releases(releases.iter().cloned())
            .extend_deps(deps.iter().cloned())
            .build()
            .context("fetched metadata does not form a valid snapshot")?;
        std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
        write_jsonl(&args.out_dir.join("releases.jsonl"), &releases)?;
        write_jsonl(&args.out_dir.join("deps.jsonl"), &deps)?;
        let advisories = args.out_dir.join("advisories.jsonl");
        if !advisories.exists() {
            write_jsonl::<AdvisoryRecord>(&advisories, &[])?;
        }
    }
    let summary = Summary { packages: args.packages.len(), releases: releases.len(), deps: deps.len() };
    let payload = Payload {
        registry: client.base().to_string(),
        out_dir: args.out_dir.display().to_string(),
        packages: args.packages.clone(),
    };
    out.emit("fetch", summary, payload, |s, p| {
        if s.packages == 0 {
            "no packages requested; nothing fetched\n".to_string()
        } else {
            format!(
                "fetched {} packages from {}: {} releases, {} dependency edges into {}\n",
                s.packages, p.registry, s.releases, s.deps, p.out_dir
            )
        }
    })?;
    Ok(0)
}
