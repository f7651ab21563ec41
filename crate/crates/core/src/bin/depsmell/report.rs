use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report<'a, S: Serialize, P: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'a str,
    pub generated_at: String,
    pub summary: S,
    pub payload: P,
}

/// Report time; `SOURCE_DATE_EPOCH` pins it for reproducible output.
pub fn generated_at() -> anyhow::Result<String> {
    let now = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(raw) => {
            let secs: i64 = raw.trim().parse().context("SOURCE_DATE_EPOCH must be an integer")?;
            DateTime::<Utc>::from_timestamp(secs, 0).context("SOURCE_DATE_EPOCH out of range")?
        }
        Err(_) => Utc::now(),
    };
    Ok(now.to_rfc3339_opts(SecondsFormat::Secs, true))
}

pub struct Output {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Output {
    pub fn emit<S: Serialize, P: Serialize>(
        &self,
        command: &str,
        summary: S,
        payload: P,
        text: impl FnOnce(&S, &P) -> String,
    ) -> anyhow::Result<()> {
        let body = match self.format {
            Format::Text => text(&summary, &payload),
            Format::Json => {
                let report = Report {
                    schema_version: SCHEMA_VERSION,
                    tool: "depsmell",
                    tool_version: env!("CARGO_PKG_VERSION"),
                    command,
                    generated_at: generated_at()?,
                    summary,
                    payload,
                };
                let mut s = serde_json::to_string_pretty(&report)?;
                s.push('\n');
                s
            }
        };
        match &self.path {
            Some(path) => depsmell::ecosystem::write_atomic(path, body.as_bytes())
                .with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

/// JSON lines file written atomically.
pub fn write_records<T: Serialize>(path: &std::path::Path, records: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, &r)?;
        buf.push(b'\n');
    }
    depsmell::ecosystem::write_atomic(path, &buf).with_context(|| format!("writing {}", path.display()))
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}
