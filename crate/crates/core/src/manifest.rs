//! package.json parsing, dependency-string classification and lockfile
//! detection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::semver::{parse_range, RangeExpr, SemverError, Version};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("malformed manifest: {0}")]
    Malformed(String),
    #[error("manifest has no \"name\" field")]
    MissingName,
    #[error("manifest version is not valid semver: {0}")]
    InvalidVersion(#[source] SemverError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// Which dependency section of the manifest an entry comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepKind {
    Runtime,
    Dev,
    Optional,
}

impl DepKind {
    pub fn section(self) -> &'static str {
        match self {
            DepKind::Runtime => "dependencies",
            DepKind::Dev => "devDependencies",
            DepKind::Optional => "optionalDependencies",
        }
    }
}

impl fmt::Display for DepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepKind::Runtime => "runtime",
            DepKind::Dev => "dev",
            DepKind::Optional => "optional",
        })
    }
}

/// A non-fatal anomaly found while reading a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestWarning {
    pub section: String,
    pub dependency: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub name: String,
    /// `None` when the manifest omits `version` (common for private apps).
    pub version: Option<Version>,
    pub runtime_deps: BTreeMap<String, String>,
    pub dev_deps: BTreeMap<String, String>,
    pub optional_deps: BTreeMap<String, String>,
    pub warnings: Vec<ManifestWarning>,
}

impl Manifest {
    pub fn deps(&self, kind: DepKind) -> &BTreeMap<String, String> {
        match kind {
            DepKind::Runtime => &self.runtime_deps,
            DepKind::Dev => &self.dev_deps,
            DepKind::Optional => &self.optional_deps,
        }
    }

    /// Renders the manifest back to a package.json document.
    pub fn to_json(&self) -> serde_json::Value {
        let mut doc = serde_json::Map::new();
        doc.insert("name".into(), self.name.clone().into());
        if let Some(v) = &self.version {
            doc.insert("version".into(), v.to_string().into());
        }
        for kind in [DepKind::Runtime, DepKind::Dev, DepKind::Optional] {
            let deps = self.deps(kind);
            if !deps.is_empty() {
                doc.insert(kind.section().into(), serde_json::to_value(deps).expect("string map"));
            }
        }
        serde_json::Value::Object(doc)
    }
}

/// Dependency section that remembers duplicate keys instead of silently
/// keeping the last one.
#[derive(Default)]
struct DepSection {
    entries: BTreeMap<String, String>,
    duplicates: Vec<String>,
}

impl<'de> Deserialize<'de> for DepSection {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SectionVisitor;

        impl<'de> Visitor<'de> for SectionVisitor {
            type Value = DepSection;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping dependency names to constraint strings")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<DepSection, A::Error> {
                let mut section = DepSection::default();
                while let Some((name, constraint)) = map.next_entry::<String, String>()? {
                    if section.entries.insert(name.clone(), constraint).is_some() {
                        section.duplicates.push(name);
                    }
                }
                Ok(section)
            }
        }

        deserializer.deserialize_map(SectionVisitor)
    }
}

#[derive(Deserialize)]
struct RawManifest {
    name: Option<String>,
    version: Option<String>,
    #[serde(default)]
    dependencies: Option<DepSection>,
    #[serde(default, rename = "devDependencies")]
    dev_dependencies: Option<DepSection>,
    #[serde(default, rename = "optionalDependencies")]
    optional_dependencies: Option<DepSection>,
}

pub fn parse_manifest(document: &[u8]) -> Result<Manifest, ManifestError> {
    let raw: RawManifest = serde_json::from_slice(document).map_err(|e| ManifestError::Malformed(e.to_string()))?;
    let name = raw.name.filter(|n| !n.trim().is_empty()).ok_or(ManifestError::MissingName)?;
    let version =
        raw.version.map(|v| crate::semver::parse_version(&v)).transpose().map_err(ManifestError::InvalidVersion)?;

    let mut warnings = Vec::new();
    let mut take = |section: Option<DepSection>, kind: DepKind| {
        let section = section.unwrap_or_default();
        for dup in section.duplicates {
            log::warn!("{} lists {dup} more than once; the last entry wins", kind.section());
            warnings.push(ManifestWarning {
                section: kind.section().to_string(),
                dependency: dup,
                message: "duplicate key; last occurrence wins".to_string(),
            });
        }
        section.entries
    };
    let runtime_deps = take(raw.dependencies, DepKind::Runtime);
    let dev_deps = take(raw.dev_dependencies, DepKind::Dev);
    let optional_deps = take(raw.optional_dependencies, DepKind::Optional);

    Ok(Manifest { name, version, runtime_deps, dev_deps, optional_deps, warnings })
}

pub fn read_manifest(project_dir: &Path) -> Result<Manifest, ManifestError> {
    let path = project_dir.join("package.json");
    let bytes =
        std::fs::read(&path).map_err(|source| ManifestError::Io { path: path.display().to_string(), source })?;
    parse_manifest(&bytes)
}

/// How a raw dependency string is resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecKind {
    RegistryRange(RangeExpr),
    Url,
    Git,
    File,
    Tag,
    Unparseable,
}

impl SpecKind {
    pub fn label(&self) -> &'static str {
        match self {
            SpecKind::RegistryRange(_) => "registry_range",
            SpecKind::Url => "url",
            SpecKind::Git => "git",
            SpecKind::File => "file",
            SpecKind::Tag => "tag",
            SpecKind::Unparseable => "unparseable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub kind: SpecKind,
    pub raw: String,
}

impl ConstraintSpec {
    pub fn range(&self) -> Option<&RangeExpr> {
        match &self.kind {
            SpecKind::RegistryRange(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_registry(&self) -> bool {
        matches!(self.kind, SpecKind::RegistryRange(_))
    }
}

const GIT_PREFIXES: &[&str] = &[
    "git:",
    "git+ssh:",
    "git+https:",
    "git+http:",
    "git+file:",
    "ssh://",
    "github:",
    "gitlab:",
    "bitbucket:",
    "gist:",
];

fn is_owner_repo_shorthand(s: &str) -> bool {
    let (path, _committish) = s.split_once('#').unwrap_or((s, ""));
    let Some((owner, repo)) = path.split_once('/') else {
        return false;
    };
    let ok = |part: &str| {
        !part.is_empty()
            && part.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            && !part.starts_with('.')
    };
    ok(owner) && ok(repo)
}

fn is_tag(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

/// Classifies a raw dependency string. Total: every input maps to one kind.
pub fn classify_spec(raw: &str) -> ConstraintSpec {
    let s = raw.trim();
    let lower = s.to_ascii_lowercase();
    let kind = if let Some(alias) = s.strip_prefix("npm:") {
        // npm:name@range, where name may itself be scoped
        let at = alias.char_indices().skip(1).find(|&(_, c)| c == '@').map(|(i, _)| i);
        match at {
            None => SpecKind::Tag,
            Some(i) => classify_spec(&alias[i + 1..]).kind,
        }
    } else if lower.starts_with("http://") || lower.starts_with("https://") {
        SpecKind::Url
    } else if GIT_PREFIXES.iter().any(|p| lower.starts_with(p)) || (lower.starts_with("git@") && s.contains(':')) {
        SpecKind::Git
    } else if lower.starts_with("file:")
        || lower.starts_with("link:")
        || s.starts_with("./")
        || s.starts_with("../")
        || s.starts_with('/')
        || s.starts_with("~/")
    {
        SpecKind::File
    } else if let Ok(range) = parse_range(s) {
        SpecKind::RegistryRange(range)
    } else if is_owner_repo_shorthand(s) {
        SpecKind::Git
    } else if is_tag(s) {
        SpecKind::Tag
    } else {
        SpecKind::Unparseable
    };
    ConstraintSpec { kind, raw: raw.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LockfileKind {
    PackageLock,
    Shrinkwrap,
    YarnLock,
}

impl LockfileKind {
    pub const ALL: [LockfileKind; 3] = [LockfileKind::PackageLock, LockfileKind::Shrinkwrap, LockfileKind::YarnLock];

    pub fn file_name(self) -> &'static str {
        match self {
            LockfileKind::PackageLock => "package-lock.json",
            LockfileKind::Shrinkwrap => "npm-shrinkwrap.json",
            LockfileKind::YarnLock => "yarn.lock",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LockfileStatus {
    pub present: bool,
    pub which: BTreeSet<LockfileKind>,
}

impl LockfileStatus {
    pub fn from_kinds(which: BTreeSet<LockfileKind>) -> Self {
        LockfileStatus { present: !which.is_empty(), which }
    }
}

/// Looks for lockfiles in the project root only.
pub fn detect_lockfile(project_dir: &Path) -> io::Result<LockfileStatus> {
    let mut which = BTreeSet::new();
    for entry in std::fs::read_dir(project_dir)? {
        let entry = entry?;
        let name = entry.file_name();
        if let Some(kind) = LockfileKind::ALL.into_iter().find(|k| name == k.file_name()) {
            if entry.file_type()?.is_file() {
                which.insert(kind);
            }
        }
    }
    Ok(LockfileStatus::from_kinds(which))
}
