//! Dependency smell detection (S1–S7).

pub mod imports;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::manifest::{
    classify_spec, detect_lockfile, read_manifest, DepKind, LockfileKind, LockfileStatus, Manifest, ManifestError,
    ManifestWarning, SpecKind,
};
use crate::semver::{min_release, update_extent, UpdateExtent};
pub use imports::{scan_imports, scan_source_tree, ImportSite, Imports, ScanReport, DEFAULT_EXTENSIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Smell {
    #[serde(rename = "S1")]
    Pinned,
    #[serde(rename = "S2")]
    Url,
    #[serde(rename = "S3")]
    Restrictive,
    #[serde(rename = "S4")]
    Permissive,
    #[serde(rename = "S5")]
    NoLock,
    #[serde(rename = "S6")]
    Unused,
    #[serde(rename = "S7")]
    Missing,
}

impl Smell {
    pub const ALL: [Smell; 7] = [
        Smell::Pinned,
        Smell::Url,
        Smell::Restrictive,
        Smell::Permissive,
        Smell::NoLock,
        Smell::Unused,
        Smell::Missing,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Smell::Pinned => "S1",
            Smell::Url => "S2",
            Smell::Restrictive => "S3",
            Smell::Permissive => "S4",
            Smell::NoLock => "S5",
            Smell::Unused => "S6",
            Smell::Missing => "S7",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Smell::Pinned => "pinned dependency",
            Smell::Url => "URL dependency",
            Smell::Restrictive => "restrictive constraint",
            Smell::Permissive => "permissive constraint",
            Smell::NoLock => "no package-lock",
            Smell::Unused => "unused dependency",
            Smell::Missing => "missing dependency",
        }
    }

    /// Accepts `S1`..`S7` or the kebab-case title (`pinned`, `no-lock`, ...).
    pub fn from_id(s: &str) -> Option<Smell> {
        let s = s.trim().to_ascii_lowercase();
        Smell::ALL.into_iter().find(|smell| {
            smell.id().eq_ignore_ascii_case(&s)
                || match smell {
                    Smell::Pinned => s == "pinned",
                    Smell::Url => s == "url",
                    Smell::Restrictive => s == "restrictive",
                    Smell::Permissive => s == "permissive",
                    Smell::NoLock => s == "no-lock",
                    Smell::Unused => s == "unused",
                    Smell::Missing => s == "missing",
                }
        })
    }
}

impl fmt::Display for Smell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SmellFinding {
    pub smell: Smell,
    pub dependency: Option<String>,
    pub evidence: String,
    pub message: String,
}

/// The constraint smell (if any) for one registry dependency string.
pub fn constraint_smell(raw: &str) -> Option<Smell> {
    let spec = classify_spec(raw);
    match &spec.kind {
        SpecKind::Url | SpecKind::Git => Some(Smell::Url),
        SpecKind::RegistryRange(range) => {
            let extent = update_extent(range, None).ok()?;
            let post_one = min_release(range).is_some_and(|floor| floor.major >= 1);
            match (extent, post_one) {
                (UpdateExtent::Exact, _) => Some(Smell::Pinned),
                (UpdateExtent::Major, _) => Some(Smell::Permissive),
                (UpdateExtent::Patch, true) => Some(Smell::Restrictive),
                _ => None,
            }
        }
        SpecKind::File | SpecKind::Tag | SpecKind::Unparseable => None,
    }
}

fn constraint_message(smell: Smell, kind: DepKind) -> String {
    let what = match smell {
        Smell::Pinned => "accepts only a single version",
        Smell::Url => "points outside the registry",
        Smell::Restrictive => "accepts patch updates only",
        Smell::Permissive => "accepts major (breaking) updates",
        _ => unreachable!("not a constraint smell"),
    };
    format!("{} constraint {what}", kind)
}

/// S1–S4 over the runtime dependencies.
pub fn detect_constraint_smells(m: &Manifest) -> Vec<SmellFinding> {
    detect_constraint_smells_in(m, &[DepKind::Runtime])
}

pub fn detect_constraint_smells_in(m: &Manifest, kinds: &[DepKind]) -> Vec<SmellFinding> {
    let mut findings = Vec::new();
    for &kind in kinds {
        for (name, raw) in m.deps(kind) {
            if let Some(smell) = constraint_smell(raw) {
                findings.push(SmellFinding {
                    smell,
                    dependency: Some(name.clone()),
                    evidence: raw.clone(),
                    message: constraint_message(smell, kind),
                });
            }
        }
    }
    findings
}

pub fn detect_lock_smell(status: &LockfileStatus) -> Option<SmellFinding> {
    if status.present {
        return None;
    }
    let looked_for: Vec<_> = LockfileKind::ALL.iter().map(|k| k.file_name()).collect();
    Some(SmellFinding {
        smell: Smell::NoLock,
        dependency: None,
        evidence: format!("none of {} found", looked_for.join(", ")),
        message: "project does not commit a lockfile".to_string(),
    })
}

fn site_list(sites: &[ImportSite]) -> String {
    const SHOWN: usize = 3;
    let mut parts: Vec<_> = sites.iter().take(SHOWN).map(|s| format!("{}:{}", s.file.display(), s.line)).collect();
    if sites.len() > SHOWN {
        parts.push(format!("+{} more", sites.len() - SHOWN));
    }
    parts.join(", ")
}

/// S6 (declared but never imported) and S7 (imported but not a runtime
/// dependency).
pub fn detect_code_smells(m: &Manifest, imports: &Imports) -> Vec<SmellFinding> {
    let mut findings = Vec::new();
    for name in m.runtime_deps.keys() {
        if !imports.contains(name) {
            findings.push(SmellFinding {
                smell: Smell::Unused,
                dependency: Some(name.clone()),
                evidence: "package.json dependencies".to_string(),
                message: "runtime dependency is never imported".to_string(),
            });
        }
    }
    for (name, sites) in imports.iter() {
        if m.runtime_deps.contains_key(name) {
            continue;
        }
        let mut evidence = if sites.is_empty() { "imported".to_string() } else { site_list(sites) };
        for kind in [DepKind::Dev, DepKind::Optional] {
            if m.deps(kind).contains_key(name) {
                evidence.push_str(&format!(" (listed only in {})", kind.section()));
            }
        }
        findings.push(SmellFinding {
            smell: Smell::Missing,
            dependency: Some(name.clone()),
            evidence,
            message: "imported package is not a runtime dependency".to_string(),
        });
    }
    findings
}

#[derive(Debug, Clone)]
pub struct LintOptions {
    /// Also check constraint smells in dev and optional dependencies.
    pub include_dev_optional: bool,
    /// Report S5 when no lockfile is present.
    pub check_lockfile: bool,
    /// Run the source scan (S6/S7).
    pub check_imports: bool,
    /// Directory to scan for imports; defaults to the project directory.
    pub source_root: Option<PathBuf>,
    pub extensions: Vec<String>,
}

impl Default for LintOptions {
    fn default() -> Self {
        LintOptions {
            include_dev_optional: false,
            check_lockfile: true,
            check_imports: true,
            source_root: None,
            extensions: DEFAULT_EXTENSIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LintError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("cannot scan {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LintOutcome {
    pub findings: Vec<SmellFinding>,
    pub manifest_warnings: Vec<ManifestWarning>,
    pub notices: Vec<String>,
}

pub fn lint_project(project_dir: &Path, options: &LintOptions) -> Result<LintOutcome, LintError> {
    let manifest = read_manifest(project_dir)?;
    let mut outcome = LintOutcome { manifest_warnings: manifest.warnings.clone(), ..Default::default() };

    let kinds: &[DepKind] = if options.include_dev_optional {
        &[DepKind::Runtime, DepKind::Dev, DepKind::Optional]
    } else {
        &[DepKind::Runtime]
    };
    outcome.findings.extend(detect_constraint_smells_in(&manifest, kinds));

    if options.check_lockfile {
        let status = detect_lockfile(project_dir)
            .map_err(|source| LintError::Io { path: project_dir.display().to_string(), source })?;
        outcome.findings.extend(detect_lock_smell(&status));
    }

    if options.check_imports {
        let root = options.source_root.clone().unwrap_or_else(|| project_dir.to_path_buf());
        let extensions: Vec<&str> = options.extensions.iter().map(String::as_str).collect();
        let scan = scan_source_tree(&root, &extensions)
            .map_err(|source| LintError::Io { path: root.display().to_string(), source })?;
        outcome.findings.extend(detect_code_smells(&manifest, &scan.imports));
        for (path, reason) in &scan.skipped {
            outcome.notices.push(format!("skipped {}: {reason}", path.display()));
        }
        for site in &scan.dynamic_ignored {
            outcome.notices.push(format!(
                "{}:{}: non-literal module specifier ignored",
                site.file.display(),
                site.line
            ));
        }
    }

    outcome.findings.sort_by(|a, b| {
        a.smell.cmp(&b.smell).then_with(|| a.dependency.cmp(&b.dependency)).then_with(|| a.evidence.cmp(&b.evidence))
    });
    Ok(outcome)
}
