use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::version::{Cursor, Identifier, Version};
use super::SemverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Op {
    fn symbol(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "",
        }
    }
}

/// One primitive comparison against a version.
///
/// `partial_floor` marks lower bounds that admit `M.m.p-0` and up when
/// prereleases are opted in: floors from partial versions (`^1.2`, `1.x`,
/// `>=1`) and hyphen-range floors. Tilde floors do not widen. This mirrors how
/// the reference evaluator desugars each form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparator {
    pub op: Op,
    pub version: Version,
    pub partial_floor: bool,
}

impl Comparator {
    fn new(op: Op, version: Version) -> Self {
        Comparator { op, version, partial_floor: false }
    }

    fn floor(version: Version) -> Self {
        Comparator { op: Op::Ge, version, partial_floor: true }
    }

    fn below(major: u64, minor: u64, patch: u64) -> Self {
        Comparator::new(Op::Lt, Version::lowest_prerelease(major, minor, patch))
    }

    pub fn matches(&self, v: &Version, include_prerelease: bool) -> bool {
        let widened;
        let bound = if self.partial_floor && include_prerelease && !self.version.is_prerelease() {
            widened = Version::lowest_prerelease(self.version.major, self.version.minor, self.version.patch);
            &widened
        } else {
            &self.version
        };
        match self.op {
            Op::Lt => v < bound,
            Op::Le => v <= bound,
            Op::Gt => v > bound,
            Op::Ge => v >= bound,
            Op::Eq => v == bound,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.op.symbol(), self.version)
    }
}

/// A conjunction of comparators. An empty set matches every release.
pub type ComparatorSet = Vec<Comparator>;

/// A parsed range: a disjunction of comparator sets in desugared form.
/// The original text is kept for display and serialization.
#[derive(Debug, Clone)]
pub struct RangeExpr {
    raw: String,
    sets: Vec<ComparatorSet>,
}

impl PartialEq for RangeExpr {
    fn eq(&self, other: &Self) -> bool {
        self.sets == other.sets
    }
}

impl Eq for RangeExpr {}

impl RangeExpr {
    pub fn parse(text: &str) -> Result<Self, SemverError> {
        parse_range(text)
    }

    /// The unbounded range (`*`).
    pub fn any() -> Self {
        RangeExpr { raw: "*".to_string(), sets: vec![Vec::new()] }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn sets(&self) -> &[ComparatorSet] {
        &self.sets
    }

    pub fn satisfies(&self, v: &Version, include_prerelease: bool) -> bool {
        satisfies(v, self, include_prerelease)
    }

    /// The desugared comparator form, e.g. `>=1.2.3 <2.0.0-0`.
    pub fn desugared(&self) -> String {
        self.sets
            .iter()
            .map(|set| {
                if set.is_empty() {
                    "*".to_string()
                } else {
                    set.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
                }
            })
            .collect::<Vec<_>>()
            .join(" || ")
    }
}

impl fmt::Display for RangeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for RangeExpr {
    type Err = SemverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_range(s)
    }
}

impl Serialize for RangeExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for RangeExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_range(&s).map_err(serde::de::Error::custom)
    }
}

/// True iff `v` is in the satisfaction set of `range`.
///
/// A prerelease version only matches a comparator set when
/// `include_prerelease` is set or some comparator in that set carries a
/// prerelease on the same `(major, minor, patch)` triple.
pub fn satisfies(v: &Version, range: &RangeExpr, include_prerelease: bool) -> bool {
    range.sets.iter().any(|set| set_matches(set, v, include_prerelease))
}

fn set_matches(set: &[Comparator], v: &Version, include_prerelease: bool) -> bool {
    if !set.iter().all(|c| c.matches(v, include_prerelease)) {
        return false;
    }
    if v.is_prerelease() && !include_prerelease {
        return set.iter().any(|c| c.version.is_prerelease() && c.version.triple() == v.triple());
    }
    true
}

/// Highest member of `versions` that satisfies `range`.
pub fn max_satisfying<'a, I>(versions: I, range: &RangeExpr, include_prerelease: bool) -> Option<&'a Version>
where
    I: IntoIterator<Item = &'a Version>,
{
    versions.into_iter().filter(|v| satisfies(v, range, include_prerelease)).max()
}

/// Lowest member of `versions` that satisfies `range`.
pub fn min_satisfying<'a, I>(versions: I, range: &RangeExpr, include_prerelease: bool) -> Option<&'a Version>
where
    I: IntoIterator<Item = &'a Version>,
{
    versions.into_iter().filter(|v| satisfies(v, range, include_prerelease)).min()
}

/// Parses an npm-style range: `||` unions of whitespace-separated
/// comparators, with caret, tilde, x-range, hyphen and wildcard sugar.
pub fn parse_range(text: &str) -> Result<RangeExpr, SemverError> {
    let mut sets = Vec::new();
    let mut offset = 0;
    for arm in text.split("||") {
        sets.push(parse_arm(text, offset, arm)?);
        offset += arm.len() + 2;
    }
    Ok(RangeExpr { raw: text.trim().to_string(), sets })
}

/// A possibly-partial version: missing or wildcard components are `None`.
#[derive(Debug, Clone)]
struct Partial {
    major: Option<u64>,
    minor: Option<u64>,
    patch: Option<u64>,
    prerelease: Vec<Identifier>,
}

impl Partial {
    fn full(&self) -> Option<Version> {
        Some(Version {
            major: self.major?,
            minor: self.minor?,
            patch: self.patch?,
            prerelease: self.prerelease.clone(),
            build: Vec::new(),
        })
    }

    fn zeroed(&self) -> (u64, u64, u64) {
        (self.major.unwrap_or(0), self.minor.unwrap_or(0), self.patch.unwrap_or(0))
    }
}

fn parse_arm(full: &str, offset: usize, arm: &str) -> Result<ComparatorSet, SemverError> {
    let mut cursor = Cursor { input: full, pos: offset };
    let end = offset + arm.len();
    cursor.skip_ws();
    if cursor.pos >= end {
        return Ok(Vec::new());
    }

    // hyphen range: `<partial> - <partial>`
    let start = cursor.pos;
    if let Ok(from) = partial(&mut cursor, end) {
        let after_from = cursor.pos;
        if cursor.skip_ws() && cursor.eat(b'-') && cursor.skip_ws() {
            let to = partial(&mut cursor, end)?;
            cursor.skip_ws();
            if cursor.pos < end {
                return Err(cursor.error("unexpected input after hyphen range"));
            }
            return Ok(hyphen(&from, &to));
        }
        cursor.pos = after_from;
    }
    cursor.pos = start;

    let mut set = Vec::new();
    while cursor.pos < end {
        let op = operator(&mut cursor);
        cursor.skip_ws();
        if cursor.pos >= end {
            return Err(cursor.error("expected a version"));
        }
        let p = partial(&mut cursor, end)?;
        if cursor.pos < end && !cursor.skip_ws() {
            return Err(cursor.error("expected whitespace between comparators"));
        }
        desugar(op, &p, &mut set);
    }
    if set.iter().any(is_null) {
        set.retain(is_null);
        set.truncate(1);
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sugar {
    Plain(Op),
    Bare,
    Tilde,
    Caret,
}

fn operator(cursor: &mut Cursor<'_>) -> Sugar {
    match (cursor.peek(), cursor.peek_at(1)) {
        (Some(b'>'), Some(b'=')) => {
            cursor.pos += 2;
            Sugar::Plain(Op::Ge)
        }
        (Some(b'<'), Some(b'=')) => {
            cursor.pos += 2;
            Sugar::Plain(Op::Le)
        }
        (Some(b'>'), _) => {
            cursor.pos += 1;
            Sugar::Plain(Op::Gt)
        }
        (Some(b'<'), _) => {
            cursor.pos += 1;
            Sugar::Plain(Op::Lt)
        }
        (Some(b'='), _) => {
            cursor.pos += 1;
            Sugar::Plain(Op::Eq)
        }
        (Some(b'~'), Some(b'>')) => {
            cursor.pos += 2;
            Sugar::Tilde
        }
        (Some(b'~'), _) => {
            cursor.pos += 1;
            Sugar::Tilde
        }
        (Some(b'^'), _) => {
            cursor.pos += 1;
            Sugar::Caret
        }
        _ => Sugar::Bare,
    }
}

fn component(cursor: &mut Cursor<'_>) -> Result<Option<u64>, SemverError> {
    match cursor.peek() {
        Some(b'x' | b'X' | b'*') => {
            cursor.pos += 1;
            Ok(None)
        }
        _ => cursor.number().map(Some),
    }
}

fn partial(cursor: &mut Cursor<'_>, end: usize) -> Result<Partial, SemverError> {
    while cursor.pos < end && matches!(cursor.peek(), Some(b'v' | b'=')) {
        cursor.pos += 1;
    }
    let mut p = Partial { major: None, minor: None, patch: None, prerelease: Vec::new() };
    p.major = component(cursor)?;
    if cursor.eat(b'.') {
        p.minor = component(cursor)?;
        if cursor.eat(b'.') {
            p.patch = component(cursor)?;
            let qualified_at = cursor.pos;
            let (prerelease, _build) = cursor.qualifiers()?;
            if !prerelease.is_empty() && (p.major.is_none() || p.minor.is_none() || p.patch.is_none()) {
                cursor.pos = qualified_at;
                return Err(cursor.error("prerelease on a wildcard version"));
            }
            p.prerelease = prerelease;
        }
    }
    // A wildcard fixes every later component as a wildcard.
    if p.major.is_none() {
        p.minor = None;
        p.patch = None;
    } else if p.minor.is_none() {
        p.patch = None;
    }
    if cursor.pos > end || (cursor.pos < end && !matches!(cursor.peek(), Some(b' ' | b'\t' | b'\n' | b'\r'))) {
        return Err(cursor.error("unexpected character in version"));
    }
    Ok(p)
}

fn is_null(c: &Comparator) -> bool {
    c.op == Op::Lt && c.version == Version::lowest_prerelease(0, 0, 0)
}

fn null_comparator() -> Comparator {
    Comparator::below(0, 0, 0)
}

fn desugar(sugar: Sugar, p: &Partial, out: &mut ComparatorSet) {
    match sugar {
        Sugar::Tilde => tilde(p, out),
        Sugar::Caret => caret(p, out),
        Sugar::Bare | Sugar::Plain(Op::Eq) => x_range_eq(p, out),
        Sugar::Plain(op) => x_range_op(op, p, out),
    }
}

fn x_range_eq(p: &Partial, out: &mut ComparatorSet) {
    match (p.major, p.minor, p.full()) {
        (_, _, Some(v)) => out.push(Comparator::new(Op::Eq, v)),
        (None, _, _) => {}
        (Some(major), None, _) => {
            out.push(Comparator::floor(Version::new(major, 0, 0)));
            out.push(Comparator::below(major + 1, 0, 0));
        }
        (Some(major), Some(minor), None) => {
            out.push(Comparator::floor(Version::new(major, minor, 0)));
            out.push(Comparator::below(major, minor + 1, 0));
        }
    }
}

fn x_range_op(op: Op, p: &Partial, out: &mut ComparatorSet) {
    if let Some(v) = p.full() {
        out.push(Comparator::new(op, v));
        return;
    }
    let Some(major) = p.major else {
        if matches!(op, Op::Lt | Op::Gt) {
            out.push(null_comparator());
        }
        return;
    };
    let (_, minor, _) = p.zeroed();
    let minor_missing = p.minor.is_none();
    match op {
        Op::Gt => {
            let v = if minor_missing { Version::new(major + 1, 0, 0) } else { Version::new(major, minor + 1, 0) };
            out.push(Comparator::floor(v));
        }
        Op::Le => {
            if minor_missing {
                out.push(Comparator::below(major + 1, 0, 0));
            } else {
                out.push(Comparator::below(major, minor + 1, 0));
            }
        }
        Op::Lt => out.push(Comparator::below(major, minor, 0)),
        Op::Ge => out.push(Comparator::floor(Version::new(major, minor, 0))),
        Op::Eq => unreachable!("handled by x_range_eq"),
    }
}

fn tilde(p: &Partial, out: &mut ComparatorSet) {
    match (p.major, p.minor, p.full()) {
        (None, _, _) => {}
        (Some(major), None, _) => {
            out.push(Comparator::new(Op::Ge, Version::new(major, 0, 0)));
            out.push(Comparator::below(major + 1, 0, 0));
        }
        (Some(major), Some(minor), None) => {
            out.push(Comparator::new(Op::Ge, Version::new(major, minor, 0)));
            out.push(Comparator::below(major, minor + 1, 0));
        }
        (Some(major), Some(minor), Some(v)) => {
            out.push(Comparator::new(Op::Ge, v));
            out.push(Comparator::below(major, minor + 1, 0));
        }
    }
}

fn caret(p: &Partial, out: &mut ComparatorSet) {
    match (p.major, p.minor, p.full()) {
        (None, _, _) => {}
        (Some(major), None, _) => {
            out.push(Comparator::floor(Version::new(major, 0, 0)));
            out.push(Comparator::below(major + 1, 0, 0));
        }
        (Some(major), Some(minor), None) => {
            out.push(Comparator::floor(Version::new(major, minor, 0)));
            if major == 0 {
                out.push(Comparator::below(0, minor + 1, 0));
            } else {
                out.push(Comparator::below(major + 1, 0, 0));
            }
        }
        (Some(major), Some(minor), Some(v)) => {
            let patch = v.patch;
            out.push(Comparator::new(Op::Ge, v));
            if major > 0 {
                out.push(Comparator::below(major + 1, 0, 0));
            } else if minor > 0 {
                out.push(Comparator::below(0, minor + 1, 0));
            } else {
                out.push(Comparator::below(0, 0, patch + 1));
            }
        }
    }
}

fn hyphen(from: &Partial, to: &Partial) -> ComparatorSet {
    let mut set = Vec::new();
    match (from.major, from.full()) {
        (None, _) => {}
        (_, Some(v)) if v.is_prerelease() => set.push(Comparator::new(Op::Ge, v)),
        (_, Some(v)) => set.push(Comparator::floor(v)),
        (Some(_), None) => {
            let (major, minor, _) = from.zeroed();
            set.push(Comparator::floor(Version::new(major, minor, 0)));
        }
    }
    match (to.major, to.minor, to.full()) {
        (None, _, _) => {}
        (_, _, Some(v)) => set.push(Comparator::new(Op::Le, v)),
        (Some(major), None, _) => set.push(Comparator::below(major + 1, 0, 0)),
        (Some(major), Some(minor), None) => set.push(Comparator::below(major, minor + 1, 0)),
    }
    set
}
