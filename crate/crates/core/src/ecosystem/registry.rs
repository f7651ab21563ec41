//! Live package metadata ingestion from an npm-compatible registry.

use std::collections::BTreeMap;
use std::time::Duration;

use chrono::Timelike;
use serde::Deserialize;
use thiserror::Error;

use super::{DepRecord, ReleaseRecord, Timestamp};
use crate::manifest::DepKind;
use crate::semver::{parse_version, Version};

pub const DEFAULT_REGISTRY: &str = "https://registry.npmjs.org";
pub const REGISTRY_ENV: &str = "DEPSMELL_REGISTRY";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("network access is disabled (offline mode); drop --offline or load snapshot files instead")]
    Offline,
    #[error("request to {url} failed: {message}")]
    Transport { url: String, message: String },
    #[error("package {0} not found in the registry")]
    NotFound(String),
    #[error("registry answered {status} for {url}")]
    Status { url: String, status: u16 },
    #[error("package document for {package} is malformed: {message}")]
    Malformed { package: String, message: String },
    #[error("package document for {0} has no time map")]
    MissingTimeMap(String),
    #[error("package document for {package} has no publish time for {version}")]
    MissingPublishTime { package: String, version: String },
}

/// Releases and dependency edges extracted from one package document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PackageData {
    pub releases: Vec<ReleaseRecord>,
    pub deps: Vec<DepRecord>,
}

#[derive(Deserialize)]
struct Packument {
    #[serde(default)]
    versions: BTreeMap<String, VersionDoc>,
    time: Option<BTreeMap<String, String>>,
}

#[derive(Deserialize, Default)]
struct VersionDoc {
    #[serde(default)]
    dependencies: Option<BTreeMap<String, String>>,
    #[serde(default, rename = "devDependencies")]
    dev_dependencies: Option<BTreeMap<String, String>>,
    #[serde(default, rename = "optionalDependencies")]
    optional_dependencies: Option<BTreeMap<String, String>>,
}

/// Path segment for a package name; the scope separator is encoded as `%2f`.
pub fn encode_package_name(name: &str) -> String {
    name.replace('/', "%2f")
}

/// Extracts releases and per-version dependency maps from a package
/// document. Fails as a whole rather than returning partial data.
pub fn parse_packument(package: &str, body: &[u8]) -> Result<PackageData, RegistryError> {
    let malformed = |message: String| RegistryError::Malformed { package: package.to_string(), message };
    let doc: Packument = serde_json::from_slice(body).map_err(|e| malformed(e.to_string()))?;
    let time = doc.time.ok_or_else(|| RegistryError::MissingTimeMap(package.to_string()))?;

    let mut data = PackageData::default();
    for (raw_version, vdoc) in &doc.versions {
        let version: Version = parse_version(raw_version).map_err(|e| malformed(e.to_string()))?;
        let stamp = time.get(raw_version).ok_or_else(|| RegistryError::MissingPublishTime {
            package: package.to_string(),
            version: raw_version.clone(),
        })?;
        let published_at: Timestamp = chrono::DateTime::parse_from_rfc3339(stamp)
            .map_err(|e| malformed(format!("publish time {stamp:?}: {e}")))?
            .with_timezone(&chrono::Utc)
            // seconds granularity
            .with_nanosecond(0)
            .expect("zero nanoseconds is valid");
        data.releases.push(ReleaseRecord { package: package.to_string(), version: version.clone(), published_at });
        let sections = [
            (DepKind::Runtime, &vdoc.dependencies),
            (DepKind::Dev, &vdoc.dev_dependencies),
            (DepKind::Optional, &vdoc.optional_dependencies),
        ];
        for (kind, deps) in sections {
            for (name, constraint) in deps.iter().flatten() {
                data.deps.push(DepRecord {
                    package: package.to_string(),
                    version: version.clone(),
                    dep_name: name.clone(),
                    constraint: constraint.clone(),
                    kind,
                });
            }
        }
    }
    Ok(data)
}

#[derive(Debug, Clone)]
pub struct RegistryClient {
    base: String,
    offline: bool,
    http: reqwest::blocking::Client,
}

impl RegistryClient {
    pub fn new(base: impl Into<String>, offline: bool) -> Self {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("depsmell/", env!("CARGO_PKG_VERSION")))
            .build()
            .expect("HTTP client configuration is static");
        RegistryClient { base: base.into().trim_end_matches('/').to_string(), offline, http }
    }

    /// Base URL from `explicit`, else the `DEPSMELL_REGISTRY` environment
    /// variable, else the public registry.
    pub fn from_env(explicit: Option<&str>, offline: bool) -> Self {
        let base = explicit
            .map(str::to_string)
            .or_else(|| std::env::var(REGISTRY_ENV).ok().filter(|s| !s.is_empty()))
            .unwrap_or_else(|| DEFAULT_REGISTRY.to_string());
        RegistryClient::new(base, offline)
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn package_url(&self, package: &str) -> String {
        format!("{}/{}", self.base, encode_package_name(package))
    }

    pub fn fetch_packument(&self, package: &str) -> Result<PackageData, RegistryError> {
        if self.offline {
            return Err(RegistryError::Offline);
        }
        let url = self.package_url(package);
        let response = self
            .http
            .get(&url)
            .header(reqwest::header::ACCEPT, "application/json")
            .send()
            .map_err(|e| RegistryError::Transport { url: url.clone(), message: e.to_string() })?;
        let status = response.status();
        if status == reqwest::StatusCode::NOT_FOUND {
            return Err(RegistryError::NotFound(package.to_string()));
        }
        if !status.is_success() {
            return Err(RegistryError::Status { url, status: status.as_u16() });
        }
        let body =
            response.bytes().map_err(|e| RegistryError::Transport { url: url.clone(), message: e.to_string() })?;
        parse_packument(package, &body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scoped_names_encode_the_separator() {
        assert_eq!(encode_package_name("@scope/pkg"), "@scope%2fpkg");
        assert_eq!(encode_package_name("left-pad"), "left-pad");
        let c = RegistryClient::new("http://localhost:1/", true);
        assert_eq!(c.package_url("@a/b"), "http://localhost:1/@a%2fb");
    }

    #[test]
    fn offline_refuses() {
        let c = RegistryClient::new("http://localhost:1", true);
        assert!(matches!(c.fetch_packument("x"), Err(RegistryError::Offline)));
    }

    #[test]
    fn missing_time_map_is_an_error() {
        let body = br#"{"versions":{"1.0.0":{}}}"#;
        assert!(matches!(parse_packument("x", body), Err(RegistryError::MissingTimeMap(_))));
        let body = br#"{"versions":{"1.0.0":{}},"time":{}}"#;
        assert!(matches!(parse_packument("x", body), Err(RegistryError::MissingPublishTime { .. })));
    }

    #[test]
    fn extracts_dependency_kinds() {
        let body = br#"{"versions":{"1.0.0":{"dependencies":{"a":"^1.0.0"},"devDependencies":{"b":"*"}}},
                       "time":{"created":"2019-01-01T00:00:00.000Z","1.0.0":"2019-01-02T03:04:05.678Z"}}"#;
        let data = parse_packument("x", body).unwrap();
        assert_eq!(data.releases.len(), 1);
        assert_eq!(data.releases[0].published_at.to_rfc3339(), "2019-01-02T03:04:05+00:00");
        assert_eq!(data.deps.len(), 2);
        assert_eq!(data.deps[0].kind, DepKind::Runtime);
        assert_eq!(data.deps[1].kind, DepKind::Dev);
    }
}
