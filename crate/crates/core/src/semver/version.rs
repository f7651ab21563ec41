use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SemverError;

/// A single dot-separated prerelease identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Identifier {
    Numeric(u64),
    AlphaNumeric(String),
}

impl Ord for Identifier {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Identifier::Numeric(a), Identifier::Numeric(b)) => a.cmp(b),
            (Identifier::Numeric(_), Identifier::AlphaNumeric(_)) => Ordering::Less,
            (Identifier::AlphaNumeric(_), Identifier::Numeric(_)) => Ordering::Greater,
            (Identifier::AlphaNumeric(a), Identifier::AlphaNumeric(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Identifier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identifier::Numeric(n) => write!(f, "{n}"),
            Identifier::AlphaNumeric(s) => f.write_str(s),
        }
    }
}

/// A semantic version. Build metadata is carried along for display but is
/// ignored by equality, hashing and ordering.
#[derive(Debug, Clone)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
    pub prerelease: Vec<Identifier>,
    pub build: Vec<String>,
}

impl Version {
    pub const fn new(major: u64, minor: u64, patch: u64) -> Self {
        Version { major, minor, patch, prerelease: Vec::new(), build: Vec::new() }
    }

    pub fn parse(text: &str) -> Result<Self, SemverError> {
        parse_version(text)
    }

    pub fn is_prerelease(&self) -> bool {
        !self.prerelease.is_empty()
    }

    /// The `(major, minor, patch)` triple.
    pub fn triple(&self) -> (u64, u64, u64) {
        (self.major, self.minor, self.patch)
    }

    /// The same version with prerelease and build stripped.
    pub fn release(&self) -> Version {
        Version::new(self.major, self.minor, self.patch)
    }

    /// `M.m.p-0`, the lowest possible prerelease of this triple.
    pub(crate) fn lowest_prerelease(major: u64, minor: u64, patch: u64) -> Version {
        Version { prerelease: vec![Identifier::Numeric(0)], ..Version::new(major, minor, patch) }
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Version {}

impl Hash for Version {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.major.hash(state);
        self.minor.hash(state);
        self.patch.hash(state);
        self.prerelease.hash(state);
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        self.triple().cmp(&other.triple()).then_with(|| {
            match (self.prerelease.is_empty(), other.prerelease.is_empty()) {
                (true, true) => Ordering::Equal,
                (true, false) => Ordering::Greater,
                (false, true) => Ordering::Less,
                // Vec ordering is element-wise, then shorter-is-smaller.
                (false, false) => self.prerelease.cmp(&other.prerelease),
            }
        })
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)?;
        if !self.prerelease.is_empty() {
            f.write_str("-")?;
            for (i, id) in self.prerelease.iter().enumerate() {
                if i > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{id}")?;
            }
        }
        if !self.build.is_empty() {
            write!(f, "+{}", self.build.join("."))?;
        }
        Ok(())
    }
}

impl FromStr for Version {
    type Err = SemverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_version(s)
    }
}

impl Serialize for Version {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Version {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_version(&s).map_err(serde::de::Error::custom)
    }
}

/// The kind of change between two versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReleaseType {
    None,
    Prerelease,
    Patch,
    Minor,
    Major,
}

impl fmt::Display for ReleaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReleaseType::None => "none",
            ReleaseType::Prerelease => "prerelease",
            ReleaseType::Patch => "patch",
            ReleaseType::Minor => "minor",
            ReleaseType::Major => "major",
        })
    }
}

/// Classifies the jump between two versions the way npm's `semver.diff`
/// does, with `premajor`/`preminor`/`prepatch` folded into their release
/// counterparts. Order of the arguments does not matter.
///
/// Leaving a prerelease for its release is special: `1.0.1-beta -> 1.0.1`
/// is a patch, `1.1.0-rc -> 1.1.0` a minor, `1.0.0-rc -> 1.0.0` a major.
pub fn diff_release_type(older: &Version, newer: &Version) -> ReleaseType {
    let (low, high) = match older.cmp(newer) {
        Ordering::Equal => return ReleaseType::None,
        Ordering::Less => (older, newer),
        Ordering::Greater => (newer, older),
    };
    if low.is_prerelease() && !high.is_prerelease() {
        if low.patch == 0 && low.minor == 0 {
            return ReleaseType::Major;
        }
        return if high.patch != 0 {
            ReleaseType::Patch
        } else if high.minor != 0 {
            ReleaseType::Minor
        } else {
            ReleaseType::Major
        };
    }
    if low.major != high.major {
        ReleaseType::Major
    } else if low.minor != high.minor {
        ReleaseType::Minor
    } else if low.patch != high.patch {
        ReleaseType::Patch
    } else {
        ReleaseType::Prerelease
    }
}

/// Parses a full version. Surrounding whitespace and a single leading `v`
/// or `=` (or `=v`) are tolerated.
pub fn parse_version(text: &str) -> Result<Version, SemverError> {
    let mut cursor = Cursor::new(text);
    cursor.skip_ws();
    cursor.eat(b'=');
    cursor.eat(b'v');
    let version = cursor.version()?;
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.error("unexpected trailing characters"));
    }
    Ok(version)
}

/// Byte cursor shared by the version and range parsers.
pub(crate) struct Cursor<'a> {
    pub(crate) input: &'a str,
    pub(crate) pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(input: &'a str) -> Self {
        Cursor { input, pos: 0 }
    }

    pub(crate) fn peek(&self) -> Option<u8> {
        self.input.as_bytes().get(self.pos).copied()
    }

    pub(crate) fn peek_at(&self, ahead: usize) -> Option<u8> {
        self.input.as_bytes().get(self.pos + ahead).copied()
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.input.len()
    }

    pub(crate) fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
        self.pos > start
    }

    pub(crate) fn error(&self, reason: &str) -> SemverError {
        SemverError::Parse { input: self.input.to_string(), offset: self.pos, reason: reason.to_string() }
    }

    /// A numeric component without leading zeros.
    pub(crate) fn number(&mut self) -> Result<u64, SemverError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let digits = &self.input[start..self.pos];
        if digits.is_empty() {
            self.pos = start;
            return Err(self.error("expected a number"));
        }
        if digits.len() > 1 && digits.starts_with('0') {
            self.pos = start;
            return Err(self.error("numeric component has a leading zero"));
        }
        digits.parse().map_err(|_| {
            self.pos = start;
            self.error("numeric component is too large")
        })
    }

    fn identifier_run(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9' | b'a'..=b'z' | b'A'..=b'Z' | b'-')) {
            self.pos += 1;
        }
        &self.input[start..self.pos]
    }

    pub(crate) fn prerelease(&mut self) -> Result<Vec<Identifier>, SemverError> {
        let mut ids = Vec::new();
        loop {
            let start = self.pos;
            let run = self.identifier_run();
            if run.is_empty() {
                return Err(self.error("empty prerelease identifier"));
            }
            if run.bytes().all(|b| b.is_ascii_digit()) {
                if run.len() > 1 && run.starts_with('0') {
                    self.pos = start;
                    return Err(self.error("numeric prerelease identifier has a leading zero"));
                }
                let n = run.parse().map_err(|_| {
                    self.pos = start;
                    self.error("numeric prerelease identifier is too large")
                })?;
                ids.push(Identifier::Numeric(n));
            } else {
                ids.push(Identifier::AlphaNumeric(run.to_string()));
            }
            if !self.eat(b'.') {
                return Ok(ids);
            }
        }
    }

    pub(crate) fn build(&mut self) -> Result<Vec<String>, SemverError> {
        let mut ids = Vec::new();
        loop {
            let run = self.identifier_run();
            if run.is_empty() {
                return Err(self.error("empty build identifier"));
            }
            ids.push(run.to_string());
            if !self.eat(b'.') {
                return Ok(ids);
            }
        }
    }

    /// Optional `-prerelease` and `+build` suffixes.
    pub(crate) fn qualifiers(&mut self) -> Result<(Vec<Identifier>, Vec<String>), SemverError> {
        let prerelease = if self.eat(b'-') { self.prerelease()? } else { Vec::new() };
        let build = if self.eat(b'+') { self.build()? } else { Vec::new() };
        Ok((prerelease, build))
    }

    pub(crate) fn version(&mut self) -> Result<Version, SemverError> {
        let major = self.number()?;
        if !self.eat(b'.') {
            return Err(self.error("expected '.' after major component"));
        }
        let minor = self.number()?;
        if !self.eat(b'.') {
            return Err(self.error("expected '.' after minor component"));
        }
        let patch = self.number()?;
        let (prerelease, build) = self.qualifiers()?;
        Ok(Version { major, minor, patch, prerelease, build })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Version {
        parse_version(s).unwrap()
    }

    #[test]
    fn parses_plain_and_qualified_versions() {
        assert_eq!(v("1.2.3").triple(), (1, 2, 3));
        assert_eq!(v("3.4.1").triple(), (3, 4, 1));
        let q = v("1.0.0-alpha.1+build5");
        assert_eq!(q.triple(), (1, 0, 0));
        assert_eq!(q.prerelease, vec![Identifier::AlphaNumeric("alpha".into()), Identifier::Numeric(1)]);
        assert_eq!(q.build, vec!["build5".to_string()]);
    }

    #[test]
    fn tolerates_leading_v_equals_and_whitespace() {
        assert_eq!(v("v1.2.3"), v("1.2.3"));
        assert_eq!(v("=1.2.3"), v("1.2.3"));
        assert_eq!(v("  1.2.3\t"), v("1.2.3"));
    }

    #[test]
    fn reports_byte_offset_on_error() {
        match parse_version("1.2.x") {
            Err(SemverError::Parse { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse_version("1.02.3") {
            Err(SemverError::Parse { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_version("1.2.3 junk").is_err());
        assert!(parse_version("1.2").is_err());
        assert!(parse_version("1.2.3-").is_err());
        assert!(parse_version("1.2.3-01").is_err());
        assert!(parse_version("").is_err());
    }

    #[test]
    fn precedence_follows_semver() {
        let chain = [
            "1.0.0-alpha",
            "1.0.0-alpha.1",
            "1.0.0-alpha.beta",
            "1.0.0-beta",
            "1.0.0-beta.2",
            "1.0.0-beta.11",
            "1.0.0-rc.1",
            "1.0.0",
        ];
        for pair in chain.windows(2) {
            assert!(v(pair[0]) < v(pair[1]), "{} < {}", pair[0], pair[1]);
        }
        assert_eq!(v("1.2.3").cmp(&v("1.2.3")), Ordering::Equal);
        assert!(v("1.9.9") < v("2.0.0"));
        assert_eq!(v("1.2.3+a"), v("1.2.3+b"));
    }

    #[test]
    fn release_type_diffs() {
        assert_eq!(diff_release_type(&v("1.2.3"), &v("1.2.4")), ReleaseType::Patch);
        assert_eq!(diff_release_type(&v("1.2.3"), &v("1.3.0")), ReleaseType::Minor);
        assert_eq!(diff_release_type(&v("1.9.9"), &v("2.0.0")), ReleaseType::Major);
        assert_eq!(diff_release_type(&v("1.0.1-rc.1"), &v("1.0.1")), ReleaseType::Patch);
        assert_eq!(diff_release_type(&v("1.0.0-alpha"), &v("1.0.0-beta")), ReleaseType::Prerelease);
        assert_eq!(diff_release_type(&v("1.2.3"), &v("1.2.3")), ReleaseType::None);
        assert_eq!(diff_release_type(&v("1.2.3+x"), &v("1.2.3+y")), ReleaseType::None);
    }
}
