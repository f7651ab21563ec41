//! The range corpus recorded from npm's `semver` package
//! (see fixtures/semver/record_corpus.js).

#![allow(dead_code)]

use depsmell::semver::ReleaseType;
use serde::Deserialize;

#[derive(Deserialize)]
pub struct Corpus {
    pub satisfies: Vec<SatisfiesCase>,
    pub max_satisfying: Vec<MaxCase>,
    pub range_validity: Vec<ValidityCase>,
    pub compare: Vec<CompareCase>,
    pub diff: Vec<DiffCase>,
}

#[derive(Deserialize)]
pub struct SatisfiesCase {
    pub range: String,
    pub version: String,
    pub include_prerelease: bool,
    pub verdict: bool,
}

#[derive(Deserialize)]
pub struct MaxCase {
    pub range: String,
    pub versions: Vec<String>,
    pub max: Option<String>,
}

#[derive(Deserialize)]
pub struct ValidityCase {
    pub range: String,
    pub valid: bool,
}

#[derive(Deserialize)]
pub struct CompareCase {
    pub a: String,
    pub b: String,
    pub ordering: i8,
}

#[derive(Deserialize)]
pub struct DiffCase {
    pub a: String,
    pub b: String,
    pub diff: Option<String>,
}

pub fn corpus() -> Corpus {
    serde_json::from_str(include_str!("../fixtures/semver/corpus.json")).unwrap()
}

/// The reference's `diff` kinds with the pre-prefixed ones folded into their
/// release counterparts.
pub fn folded_diff(kind: Option<&str>) -> ReleaseType {
    match kind {
        None => ReleaseType::None,
        Some("prerelease") => ReleaseType::Prerelease,
        Some("patch" | "prepatch") => ReleaseType::Patch,
        Some("minor" | "preminor") => ReleaseType::Minor,
        Some("major" | "premajor") => ReleaseType::Major,
        Some(other) => panic!("unexpected diff kind {other}"),
    }
}
