//! Token-level extraction of module specifiers from JavaScript and
//! TypeScript sources.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use regex::Regex;
use serde::Serialize;
use walkdir::WalkDir;

pub const DEFAULT_EXTENSIONS: &[&str] = &["js", "mjs", "cjs", "jsx", "ts", "tsx"];

static BUILTINS_FILE: &str = include_str!("../../data/node-builtins.txt");

fn builtins() -> &'static BTreeSet<&'static str> {
    static SET: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| BUILTINS_FILE.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect())
}

pub fn is_builtin(module: &str) -> bool {
    module.starts_with("node:") || builtins().contains(module.split('/').next().unwrap_or(module))
}

/// One place in the source tree that imports a package.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ImportSite {
    pub file: PathBuf,
    pub line: usize,
}

/// Packages imported by a source tree, with every import site.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Imports {
    sites: BTreeMap<String, Vec<ImportSite>>,
}

impl Imports {
    /// Builds an index from bare package names, without site information.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Imports { sites: names.into_iter().map(|n| (n.into(), Vec::new())).collect() }
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.sites.keys().cloned().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.sites.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<ImportSite>)> {
        self.sites.iter()
    }

    pub fn sites(&self, name: &str) -> &[ImportSite] {
        self.sites.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    pub imports: Imports,
    /// Files that could not be read, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
    /// `require(expr)` / `import(expr)` calls with non-literal arguments.
    pub dynamic_ignored: Vec<ImportSite>,
}

/// Maps a module specifier to the package that provides it, or `None` for
/// relative paths, absolute paths, URLs and built-in modules.
pub fn package_name(specifier: &str) -> Option<String> {
    let s = specifier.trim();
    if s.is_empty() || s.starts_with('.') || s.starts_with('/') || s.contains(':') || is_builtin(s) {
        return None;
    }
    let mut parts = s.split('/');
    let first = parts.next()?;
    if let Some(scope) = first.strip_prefix('@') {
        let pkg = parts.next().filter(|p| !p.is_empty())?;
        if scope.is_empty() {
            return None;
        }
        Some(format!("{first}/{pkg}"))
    } else {
        Some(first.to_string())
    }
}

/// Blanks out `//` and `/* */` comments, leaving string literals and line
/// structure intact. Also returns a mask of bytes inside string literals.
fn strip_comments(src: &str) -> (String, Vec<bool>) {
    let bytes = src.as_bytes();
    let mut out = bytes.to_vec();
    let mut in_string = vec![false; bytes.len()];
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            q @ (b'\'' | b'"' | b'`') => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != q {
                    if bytes[i] == b'\\' {
                        i += 1;
                    } else if bytes[i] == b'\n' && q != b'`' {
                        break;
                    }
                    i += 1;
                }
                i += 1;
                for flag in &mut in_string[start..i.min(bytes.len())] {
                    *flag = true;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    out[i] = b' ';
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let start = i;
                i += 2;
                while i < bytes.len() && !(bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/')) {
                    i += 1;
                }
                let end = (i + 2).min(bytes.len());
                for b in &mut out[start..end] {
                    if *b != b'\n' {
                        *b = b' ';
                    }
                }
                i = end;
            }
            _ => i += 1,
        }
    }
    // only ASCII bytes were replaced, so this stays valid UTF-8
    (String::from_utf8(out).expect("comment stripping preserves UTF-8"), in_string)
}

/// Offset of the keyword in a match that may start with one boundary byte.
fn keyword_offset(text: &str, m: &regex::Match<'_>) -> usize {
    if text.as_bytes()[m.start()].is_ascii_alphabetic() {
        m.start()
    } else {
        m.start() + 1
    }
}

struct Patterns {
    literal: Vec<Regex>,
    dynamic: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        literal: vec![
            // import x from 'm'; import {a} from "m"; import 'm'; export * from 'm'
            Regex::new(r#"(?:^|[^\w$.])(?:import|export)\s+(?:[\w$*{}\s,]*?\s*from\s*)?['"]([^'"\n]+)['"]"#).unwrap(),
            // import('m')
            Regex::new(r#"(?:^|[^\w$.])import\s*\(\s*(?:['"]([^'"\n]+)['"]|`([^`$\n]+)`)\s*\)"#).unwrap(),
            // require('m')
            Regex::new(r#"(?:^|[^\w$.])require\s*\(\s*(?:['"]([^'"\n]+)['"]|`([^`$\n]+)`)\s*\)"#).unwrap(),
        ],
        dynamic: Regex::new(r#"(?:^|[^\w$.])(?:require|import)\s*\(\s*(?:[^'"`\s)]|`[^`]*\$\{)"#).unwrap(),
    })
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Extracts `(specifier, line)` pairs plus the lines of non-literal
/// dynamic imports from one source text.
pub fn extract_specifiers(src: &str) -> (Vec<(String, usize)>, Vec<usize>) {
    let (text, in_string) = strip_comments(src);
    let p = patterns();
    let mut found = Vec::new();
    for re in &p.literal {
        for caps in re.captures_iter(&text) {
            let whole = caps.get(0).expect("group 0");
            if in_string[keyword_offset(&text, &whole)] {
                continue;
            }
            let m = caps.get(1).or_else(|| caps.get(2)).expect("one alternative matches");
            found.push((m.as_str().to_string(), line_of(&text, m.start())));
        }
    }
    found.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    found.dedup();
    let dynamic = p
        .dynamic
        .find_iter(&text)
        .filter(|m| !in_string[keyword_offset(&text, m)])
        .map(|m| line_of(&text, m.end()))
        .collect();
    (found, dynamic)
}

fn is_hidden_or_vendored(entry: &walkdir::DirEntry) -> bool {
    entry.depth() > 0 && entry.file_name().to_str().is_some_and(|n| n.starts_with('.') || n == "node_modules")
}

/// Walks `source_root`, skipping `node_modules` and hidden directories, and
/// collects the packages imported by files with one of `extensions`.
pub fn scan_source_tree(source_root: &Path, extensions: &[&str]) -> std::io::Result<ScanReport> {
    std::fs::read_dir(source_root)?;
    let mut files = Vec::new();
    let mut report = ScanReport::default();
    for entry in WalkDir::new(source_root).sort_by_file_name().into_iter().filter_entry(|e| !is_hidden_or_vendored(e)) {
        match entry {
            Ok(e) if e.file_type().is_file() => {
                let ext = e.path().extension().and_then(|x| x.to_str()).unwrap_or("");
                if extensions.contains(&ext) {
                    files.push(e.into_path());
                }
            }
            Ok(_) => {}
            Err(err) => {
                let path = err.path().map(Path::to_path_buf).unwrap_or_default();
                log::warn!("skipping {}: {err}", path.display());
                report.skipped.push((path, err.to_string()));
            }
        }
    }

    let per_file: Vec<_> = files
        .par_iter()
        .map(|path| {
            let rel = path.strip_prefix(source_root).unwrap_or(path).to_path_buf();
            match std::fs::read(path) {
                Ok(bytes) => Ok((rel, extract_specifiers(&String::from_utf8_lossy(&bytes)))),
                Err(e) => Err((rel, e.to_string())),
            }
        })
        .collect();

    let mut sites: BTreeMap<String, Vec<ImportSite>> = BTreeMap::new();
    for result in per_file {
        match result {
            Ok((file, (specifiers, dynamic))) => {
                for (spec, line) in specifiers {
                    if let Some(name) = package_name(&spec) {
                        sites.entry(name).or_default().push(ImportSite { file: file.clone(), line });
                    }
                }
                for line in dynamic {
                    log::info!("{}:{line}: non-literal module specifier ignored", file.display());
                    report.dynamic_ignored.push(ImportSite { file: file.clone(), line });
                }
            }
            Err((file, reason)) => {
                log::warn!("skipping {}: {reason}", file.display());
                report.skipped.push((file, reason));
            }
        }
    }
    report.imports = Imports { sites };
    Ok(report)
}

/// The set of package names imported under `source_root` with the default
/// extensions.
pub fn scan_imports(source_root: &Path) -> std::io::Result<BTreeSet<String>> {
    Ok(scan_source_tree(source_root, DEFAULT_EXTENSIONS)?.imports.names())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(src: &str) -> Vec<String> {
        let (found, _) = extract_specifiers(src);
        let mut out: Vec<_> = found.iter().filter_map(|(s, _)| package_name(s)).collect();
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn extracts_all_static_forms() {
        let src = r#"
import x from '@scope/pkg/util';
import { a, b } from "alpha";
import * as ns from 'beta';
import 'side-effect';
import type { T } from 'types-only';
export { c } from 'gamma/sub';
export * from "delta";
const l = require('lodash/fp');
const m = await import("mod-dyn");
const t = require(`tmpl`);
"#;
        assert_eq!(
            names(src),
            vec![
                "@scope/pkg",
                "alpha",
                "beta",
                "delta",
                "gamma",
                "lodash",
                "mod-dyn",
                "side-effect",
                "tmpl",
                "types-only"
            ]
        );
    }

    #[test]
    fn multiline_import_clause() {
        let src = "import {\n  one,\n  two,\n} from 'multi';\n";
        let (found, _) = extract_specifiers(src);
        assert_eq!(found, vec![("multi".to_string(), 4)]);
    }

    #[test]
    fn drops_relative_and_builtin() {
        assert!(names("require('./local'); require('fs'); require('node:path'); require('fs/promises');").is_empty());
        assert!(names("import x from '../up'; import y from '/abs';").is_empty());
    }

    #[test]
    fn ignores_comments_and_non_calls() {
        let src = "// require('commented')\n/* import x from 'blocked' */\nobj.require('method');\nconst s = \"require('in-string')\";\n";
        assert!(names(src).is_empty());
    }

    #[test]
    fn reports_computed_specifiers() {
        let (found, dynamic) = extract_specifiers("const name = 'x';\nrequire(name);\nimport(`${a}`);\n");
        assert!(found.is_empty());
        assert_eq!(dynamic, vec![2, 3]);
    }

    #[test]
    fn package_name_normalization() {
        assert_eq!(package_name("lodash/fp").as_deref(), Some("lodash"));
        assert_eq!(package_name("@scope/pkg/sub").as_deref(), Some("@scope/pkg"));
        assert_eq!(package_name("@scope").as_deref(), None);
        assert_eq!(package_name("https://cdn/x.js"), None);
        assert_eq!(package_name("events"), None);
    }
}
