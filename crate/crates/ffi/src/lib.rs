//! C ABI for depsmell.
//!
//! Every entry point returns a [`DsStatus`]. When it is not `DS_STATUS_OK`
//! the calling thread's last error message explains why; read it with
//! [`ds_last_error`]. Strings handed out through out-parameters belong to the
//! caller and must be released with [`ds_string_free`]. Snapshots and forests
//! are opaque handles released with their own `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use chrono::{DateTime, Utc};
use depsmell::ecosystem::{load_snapshot, Snapshot, SnapshotError};
use depsmell::model::{label, Forest, Label, LabelConfig};
use depsmell::semver::{max_satisfying, parse_range, parse_version, satisfies, Version};
use depsmell::smell::{constraint_smell, lint_project, LintError, LintOptions, Smell};
use depsmell::vuln::{analyze_advisory, analyze_timelines, classify_constraint, SeverityFilter, StrategyClass};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    NotFound = 5,
    InvalidArgument = 6,
    Model = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStrategy {
    Restrictive = 0,
    Balanced = 1,
    Permissive = 2,
    Unclassified = 3,
}

/// Constraint smell of a single dependency string; `DS_SMELL_NONE` when clean.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsSmell {
    None = 0,
    Pinned = 1,
    Url = 2,
    Restrictive = 3,
    Permissive = 4,
    NoLock = 5,
    Unused = 6,
    Missing = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsLabel {
    Unlabeled = 0,
    Fast = 1,
    Slow = 2,
}

/// Immutable ecosystem snapshot. Safe to share across threads for reads.
pub struct DsSnapshot {
    inner: Snapshot,
}

/// Trained random forest. Safe to share across threads for prediction.
pub struct DsForest {
    inner: Forest,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DsStatus, String);

impl Failure {
    fn new(status: DsStatus, message: impl Into<String>) -> Self {
        Failure(status, message.into())
    }
}

impl From<SnapshotError> for Failure {
    fn from(e: SnapshotError) -> Self {
        let status = match e {
            SnapshotError::Io { .. } => DsStatus::Io,
            _ => DsStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("internal error: {msg}"));
            DsStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(DsStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(DsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(DsStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(DsStatus::NullPointer, format!("{what} handle is NULL")))
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure::new(DsStatus::Panic, "string contains an interior NUL"))
}

fn version(raw: &str) -> Result<Version, Failure> {
    parse_version(raw).map_err(|e| Failure::new(DsStatus::Parse, e.to_string()))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<*mut c_char, Failure> {
    let s = serde_json::to_string(v).map_err(|e| Failure::new(DsStatus::Panic, e.to_string()))?;
    owned_string(s)
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Whether `version` satisfies `range` under npm semantics.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_semver_satisfies(
    version_text: *const c_char,
    range_text: *const c_char,
    include_prerelease: bool,
    out_result: *mut bool,
) -> DsStatus {
    guard(|| {
        let v = version(text(version_text, "version")?)?;
        let r = parse_range(text(range_text, "range")?).map_err(|e| Failure::new(DsStatus::Parse, e.to_string()))?;
        *out(out_result, "out_result")? = satisfies(&v, &r, include_prerelease);
        Ok(())
    })
}

/// Index of the highest of `versions` satisfying `range`, or -1.
///
/// # Safety
/// `versions` must point to `count` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ds_semver_max_satisfying(
    versions: *const *const c_char,
    count: usize,
    range_text: *const c_char,
    out_index: *mut isize,
) -> DsStatus {
    guard(|| {
        let r = parse_range(text(range_text, "range")?).map_err(|e| Failure::new(DsStatus::Parse, e.to_string()))?;
        if versions.is_null() && count > 0 {
            return Err(Failure::new(DsStatus::NullPointer, "versions is NULL"));
        }
        let raw = if count == 0 { &[][..] } else { std::slice::from_raw_parts(versions, count) };
        let parsed = raw
            .iter()
            .enumerate()
            .map(|(i, p)| version(text(*p, &format!("versions[{i}]"))?))
            .collect::<Result<Vec<_>, _>>()?;
        let best = max_satisfying(&parsed, &r, false);
        *out(out_index, "out_index")? =
            best.map_or(-1, |b| parsed.iter().position(|v| ptr::eq(v, b)).unwrap() as isize);
        Ok(())
    })
}

/// Three-way SemVer precedence comparison: -1, 0 or 1.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_semver_compare(a: *const c_char, b: *const c_char, out_order: *mut i32) -> DsStatus {
    guard(|| {
        let (a, b) = (version(text(a, "a")?)?, version(text(b, "b")?)?);
        *out(out_order, "out_order")? = a.cmp(&b) as i32;
        Ok(())
    })
}

/// Update strategy of a dependency constraint string.
///
/// # Safety
/// `constraint` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_classify_constraint(constraint: *const c_char, out_strategy: *mut DsStrategy) -> DsStatus {
    guard(|| {
        let s = match classify_constraint(text(constraint, "constraint")?) {
            StrategyClass::Restrictive => DsStrategy::Restrictive,
            StrategyClass::Balanced => DsStrategy::Balanced,
            StrategyClass::Permissive => DsStrategy::Permissive,
            StrategyClass::Unclassified => DsStrategy::Unclassified,
        };
        *out(out_strategy, "out_strategy")? = s;
        Ok(())
    })
}

fn smell_code(s: Option<Smell>) -> DsSmell {
    match s {
        None => DsSmell::None,
        Some(Smell::Pinned) => DsSmell::Pinned,
        Some(Smell::Url) => DsSmell::Url,
        Some(Smell::Restrictive) => DsSmell::Restrictive,
        Some(Smell::Permissive) => DsSmell::Permissive,
        Some(Smell::NoLock) => DsSmell::NoLock,
        Some(Smell::Unused) => DsSmell::Unused,
        Some(Smell::Missing) => DsSmell::Missing,
    }
}

/// Constraint smell (pinned, URL, restrictive, permissive) of one runtime
/// dependency string.
///
/// # Safety
/// `constraint` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_constraint_smell(constraint: *const c_char, out_smell: *mut DsSmell) -> DsStatus {
    guard(|| {
        *out(out_smell, "out_smell")? = smell_code(constraint_smell(text(constraint, "constraint")?));
        Ok(())
    })
}

/// Lints the project in `dir` and returns the outcome as JSON
/// (`findings`, `manifest_warnings`, `notices`).
///
/// # Safety
/// `dir` must be NUL-terminated; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_lint_project(
    dir: *const c_char,
    include_dev: bool,
    check_lockfile: bool,
    check_imports: bool,
    out_json: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        let dir = text(dir, "dir")?;
        let slot = out(out_json, "out_json")?;
        let options =
            LintOptions { include_dev_optional: include_dev, check_lockfile, check_imports, ..Default::default() };
        let outcome = lint_project(Path::new(dir), &options).map_err(|e| {
            let status = match &e {
                LintError::Io { .. } => DsStatus::Io,
                LintError::Manifest(_) => DsStatus::Parse,
            };
            Failure::new(status, e.to_string())
        })?;
        *slot = to_json(&outcome)?;
        Ok(())
    })
}

/// Loads a snapshot from its three line-delimited files.
///
/// # Safety
/// Paths must be NUL-terminated; `out_snapshot` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_snapshot_load(
    releases_path: *const c_char,
    deps_path: *const c_char,
    advisories_path: *const c_char,
    out_snapshot: *mut *mut DsSnapshot,
) -> DsStatus {
    guard(|| {
        let slot = out(out_snapshot, "out_snapshot")?;
        *slot = ptr::null_mut();
        let s = load_snapshot(
            Path::new(text(releases_path, "releases_path")?),
            Path::new(text(deps_path, "deps_path")?),
            Path::new(text(advisories_path, "advisories_path")?),
        )?;
        *slot = Box::into_raw(Box::new(DsSnapshot { inner: s }));
        Ok(())
    })
}

/// Releases a snapshot. NULL is ignored.
///
/// # Safety
/// `snapshot` must come from [`ds_snapshot_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ds_snapshot_free(snapshot: *mut DsSnapshot) {
    if !snapshot.is_null() {
        drop(Box::from_raw(snapshot));
    }
}

/// Snapshot horizon as Unix seconds.
///
/// # Safety
/// `snapshot` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_snapshot_horizon(snapshot: *const DsSnapshot, out_unix_seconds: *mut i64) -> DsStatus {
    guard(|| {
        let s = handle(snapshot, "snapshot")?;
        *out(out_unix_seconds, "out_unix_seconds")? = s.inner.horizon().timestamp();
        Ok(())
    })
}

/// Number of advisories in the snapshot.
///
/// # Safety
/// `snapshot` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_snapshot_advisory_count(snapshot: *const DsSnapshot, out_count: *mut usize) -> DsStatus {
    guard(|| {
        let s = handle(snapshot, "snapshot")?;
        *out(out_count, "out_count")? = s.inner.advisories().len();
        Ok(())
    })
}

/// Version of `package` a fresh install of `range` would pick at
/// `at_unix_seconds`. Writes NULL when nothing published by then satisfies.
///
/// # Safety
/// Strings must be NUL-terminated; `out_version` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_snapshot_resolve_at(
    snapshot: *const DsSnapshot,
    package: *const c_char,
    range_text: *const c_char,
    at_unix_seconds: i64,
    out_version: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        let s = handle(snapshot, "snapshot")?;
        let slot = out(out_version, "out_version")?;
        *slot = ptr::null_mut();
        let r = parse_range(text(range_text, "range")?).map_err(|e| Failure::new(DsStatus::Parse, e.to_string()))?;
        let at: DateTime<Utc> = DateTime::from_timestamp(at_unix_seconds, 0)
            .ok_or_else(|| Failure::new(DsStatus::InvalidArgument, "timestamp out of range"))?;
        if let Some(v) = s.inner.resolve_at(text(package, "package")?, &r, at) {
            *slot = owned_string(v.to_string())?;
        }
        Ok(())
    })
}

/// Fix and adoption timeline as JSON: one advisory object when
/// `advisory_id` is given, otherwise an array over every advisory.
///
/// # Safety
/// `snapshot` must be a live handle; `advisory_id` is NULL or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ds_snapshot_timeline_json(
    snapshot: *const DsSnapshot,
    advisory_id: *const c_char,
    out_json: *mut *mut c_char,
) -> DsStatus {
    guard(|| {
        let s = &handle(snapshot, "snapshot")?.inner;
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        *slot = if advisory_id.is_null() {
            to_json(&analyze_timelines(s, &SeverityFilter::all()))?
        } else {
            let id = text(advisory_id, "advisory_id")?;
            let a =
                s.advisory(id).ok_or_else(|| Failure::new(DsStatus::NotFound, format!("unknown advisory {id:?}")))?;
            to_json(&analyze_advisory(s, a))?
        };
        Ok(())
    })
}

/// Adoption label for a delay in days under the given thresholds.
///
/// # Safety
/// `out_label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_label(
    delay_days: f64,
    fast_below_days: f64,
    slow_above_days: f64,
    out_label: *mut DsLabel,
) -> DsStatus {
    guard(|| {
        let cfg = LabelConfig { fast_below_days, slow_above_days };
        cfg.validate().map_err(|e| Failure::new(DsStatus::InvalidArgument, e.to_string()))?;
        if !delay_days.is_finite() || delay_days < 0.0 {
            return Err(Failure::new(DsStatus::InvalidArgument, "delay must be a non-negative number of days"));
        }
        *out(out_label, "out_label")? = match label(delay_days, &cfg) {
            None => DsLabel::Unlabeled,
            Some(Label::Fast) => DsLabel::Fast,
            Some(Label::Slow) => DsLabel::Slow,
        };
        Ok(())
    })
}

fn forest_handle(json: &str) -> Result<*mut DsForest, Failure> {
    let f = Forest::from_json(json).map_err(|e| Failure::new(DsStatus::Model, e.to_string()))?;
    Ok(Box::into_raw(Box::new(DsForest { inner: f })))
}

/// Parses a serialized model.
///
/// # Safety
/// `json` must be NUL-terminated; `out_forest` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_forest_from_json(json: *const c_char, out_forest: *mut *mut DsForest) -> DsStatus {
    guard(|| {
        let slot = out(out_forest, "out_forest")?;
        *slot = ptr::null_mut();
        *slot = forest_handle(text(json, "json")?)?;
        Ok(())
    })
}

/// Loads a model file written by `depsmell train`.
///
/// # Safety
/// `path` must be NUL-terminated; `out_forest` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_forest_load(path: *const c_char, out_forest: *mut *mut DsForest) -> DsStatus {
    guard(|| {
        let slot = out(out_forest, "out_forest")?;
        *slot = ptr::null_mut();
        let path = text(path, "path")?;
        let json = std::fs::read_to_string(path)
            .map_err(|e| Failure::new(DsStatus::Io, format!("cannot read {path}: {e}")))?;
        *slot = forest_handle(&json)?;
        Ok(())
    })
}

/// Releases a forest. NULL is ignored.
///
/// # Safety
/// `forest` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ds_forest_free(forest: *mut DsForest) {
    if !forest.is_null() {
        drop(Box::from_raw(forest));
    }
}

/// Number of input features the forest expects.
///
/// # Safety
/// `forest` must be a live handle; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_forest_feature_count(forest: *const DsForest, out_count: *mut usize) -> DsStatus {
    guard(|| {
        *out(out_count, "out_count")? = handle(forest, "forest")?.inner.n_features();
        Ok(())
    })
}

/// Probability of the fast class for one feature row.
///
/// # Safety
/// `features` must point to `n_features` doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_forest_predict(
    forest: *const DsForest,
    features: *const f64,
    n_features: usize,
    out_probability: *mut f64,
) -> DsStatus {
    guard(|| {
        let f = &handle(forest, "forest")?.inner;
        if features.is_null() {
            return Err(Failure::new(DsStatus::NullPointer, "features is NULL"));
        }
        let row = std::slice::from_raw_parts(features, n_features);
        let p = f.predict_proba(row).map_err(|e| Failure::new(DsStatus::InvalidArgument, e.to_string()))?;
        *out(out_probability, "out_probability")? = p;
        Ok(())
    })
}

/// Fast-class probabilities for `n_rows` row-major feature rows.
///
/// # Safety
/// `rows` must hold `n_rows * n_features` doubles and `out_probabilities`
/// room for `n_rows`.
#[no_mangle]
pub unsafe extern "C" fn ds_forest_predict_many(
    forest: *const DsForest,
    rows: *const f64,
    n_rows: usize,
    n_features: usize,
    out_probabilities: *mut f64,
) -> DsStatus {
    guard(|| {
        let f = &handle(forest, "forest")?.inner;
        if n_rows == 0 {
            return Ok(());
        }
        if rows.is_null() || out_probabilities.is_null() {
            return Err(Failure::new(DsStatus::NullPointer, "rows or out_probabilities is NULL"));
        }
        let total = n_rows
            .checked_mul(n_features)
            .ok_or_else(|| Failure::new(DsStatus::InvalidArgument, "row count overflows"))?;
        let flat = std::slice::from_raw_parts(rows, total);
        let matrix: Vec<Vec<f64>> = flat.chunks(n_features.max(1)).map(<[f64]>::to_vec).collect();
        let probs = f.predict_many(&matrix).map_err(|e| Failure::new(DsStatus::InvalidArgument, e.to_string()))?;
        std::slice::from_raw_parts_mut(out_probabilities, n_rows).copy_from_slice(&probs);
        Ok(())
    })
}
