//! Hand-sized ecosystems (one library, a few dependents) with a day-by-day
//! reference simulation that uses its own tiny constraint evaluator.

#![allow(dead_code)]

use chrono::{Duration, TimeZone, Utc};
use depsmell::ecosystem::{AdvisoryRecord, DepRecord, ReleaseRecord, Severity, Snapshot, SnapshotBuilder, Timestamp};
use depsmell::manifest::DepKind;

pub type Triple = (u64, u64, u64);

pub fn day(n: i64) -> Timestamp {
    Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap() + Duration::days(n)
}

pub fn show(v: Triple) -> String {
    format!("{}.{}.{}", v.0, v.1, v.2)
}

#[derive(Debug, Clone, Copy)]
pub enum Mini {
    Pin(Triple),
    Caret(Triple),
    Tilde(Triple),
    AtLeast(Triple),
}

impl Mini {
    pub fn render(self) -> String {
        match self {
            Mini::Pin(v) => show(v),
            Mini::Caret(v) => format!("^{}", show(v)),
            Mini::Tilde(v) => format!("~{}", show(v)),
            Mini::AtLeast(v) => format!(">={}", show(v)),
        }
    }

    pub fn admits(self, x: Triple) -> bool {
        match self {
            Mini::Pin(v) => x == v,
            Mini::AtLeast(v) => x >= v,
            Mini::Tilde(v) => x >= v && x.0 == v.0 && x.1 == v.1,
            Mini::Caret(v) => {
                x >= v
                    && if v.0 > 0 {
                        x.0 == v.0
                    } else if v.1 > 0 {
                        x.0 == 0 && x.1 == v.1
                    } else {
                        x == v
                    }
            }
        }
    }

    pub fn widened(self) -> Mini {
        match self {
            Mini::Pin(v) => Mini::Caret(v),
            other => other,
        }
    }
}

/// Release history of one dependent: (day, constraint on lib or None when
/// that release drops the dependency).
pub type History = Vec<(i64, Option<Mini>)>;

#[derive(Debug, Clone)]
pub struct Eco {
    pub lib: Vec<(Triple, i64)>,
    pub fix_index: usize,
    pub disclosed: i64,
    pub apps: Vec<History>,
    pub horizon: i64,
}

/// What the simulation says about one dependent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    NotExposed,
    AdoptedOn(i64),
    Censored,
}

impl Eco {
    pub fn app_name(i: usize) -> String {
        format!("app{i}")
    }

    pub fn fix(&self) -> (Triple, i64) {
        self.lib[self.fix_index]
    }

    pub fn snapshot(&self) -> Snapshot {
        let mut b = SnapshotBuilder::new();
        for &(v, d) in &self.lib {
            b.release(ReleaseRecord { package: "lib".into(), version: show(v).parse().unwrap(), published_at: day(d) });
        }
        for (a, history) in self.apps.iter().enumerate() {
            for (i, &(d, c)) in history.iter().enumerate() {
                let version = format!("1.0.{i}");
                b.release(ReleaseRecord {
                    package: Self::app_name(a),
                    version: version.parse().unwrap(),
                    published_at: day(d),
                });
                if let Some(c) = c {
                    b.dep(DepRecord {
                        package: Self::app_name(a),
                        version: version.parse().unwrap(),
                        dep_name: "lib".into(),
                        constraint: c.render(),
                        kind: DepKind::Runtime,
                    });
                }
            }
        }
        let (fix, fix_day) = self.fix();
        b.advisory(AdvisoryRecord {
            id: "ADV".into(),
            package: "lib".into(),
            severity: Severity::High,
            affected: format!("<{}", show(fix)),
            first_fixed: show(fix).parse().unwrap(),
            disclosed_at: day(self.disclosed),
            fix_released_at: Some(day(fix_day)),
        });
        b.horizon(day(self.horizon));
        b.build().unwrap()
    }

    fn resolve_on(&self, app: usize, d: i64) -> Option<Triple> {
        let (_, c) = self.apps[app].iter().rfind(|(ad, _)| *ad <= d)?;
        let c = (*c)?;
        self.lib.iter().filter(|(v, ld)| *ld <= d && c.admits(*v)).map(|(v, _)| *v).max()
    }

    pub fn oracle(&self, app: usize) -> Expected {
        let (fix, fix_day) = self.fix();
        match self.resolve_on(app, fix_day - 1) {
            Some(v) if v < fix => {}
            _ => return Expected::NotExposed,
        }
        // an install happens on the fix day and on each later downstream
        // release day; in between, the previously installed version stays
        let mut installed = None;
        for d in fix_day..=self.horizon {
            if d == fix_day || self.apps[app].iter().any(|(ad, _)| *ad == d) {
                installed = self.resolve_on(app, d);
            }
            if installed.is_some_and(|v| v >= fix) {
                return Expected::AdoptedOn(d);
            }
        }
        Expected::Censored
    }

    pub fn widened(&self) -> Eco {
        let mut e = self.clone();
        for history in &mut e.apps {
            for (_, c) in history {
                *c = c.map(Mini::widened);
            }
        }
        e
    }

    pub fn release_count(&self) -> usize {
        self.lib.len() + self.apps.iter().map(Vec::len).sum::<usize>()
    }
}

/// Compares the library against the simulation for every dependent; returns
/// each dependent's delay in days (None when not exposed).
pub fn compare(eco: &Eco) -> Result<Vec<Option<f64>>, String> {
    use depsmell::vuln::{adoption_delay, find_vulnerable_dependents};

    let s = eco.snapshot();
    let a = s.advisory("ADV").unwrap();
    let listed: Vec<String> = find_vulnerable_dependents(&s, a).into_iter().map(|v| v.dependent).collect();
    let (_, fix_day) = eco.fix();
    let mut out = Vec::new();
    for i in 0..eco.apps.len() {
        let name = Eco::app_name(i);
        let expected = eco.oracle(i);
        let exposed = listed.contains(&name);
        if exposed != (expected != Expected::NotExposed) {
            return Err(format!("{name}: exposure {exposed}, simulation {expected:?}"));
        }
        let got = adoption_delay(&s, &name, a);
        let delay = match (expected, got) {
            (Expected::NotExposed, Err(_)) => None,
            (Expected::NotExposed, Ok(r)) => return Err(format!("{name}: unexpected adoption record {r:?}")),
            (_, Err(e)) => return Err(format!("{name}: {e}")),
            (Expected::AdoptedOn(d), Ok(r)) => {
                if r.censored || r.adoption_date != Some(day(d)) || r.adoption_delay_days != (d - fix_day) as f64 {
                    return Err(format!("{name}: expected adoption on day {d}, got {r:?}"));
                }
                Some(r.adoption_delay_days)
            }
            (Expected::Censored, Ok(r)) => {
                if !r.censored || r.adoption_date.is_some() || r.adoption_delay_days != (eco.horizon - fix_day) as f64 {
                    return Err(format!("{name}: expected censoring at the horizon, got {r:?}"));
                }
                Some(r.adoption_delay_days)
            }
        };
        if let (Some(_), Ok(r)) = (delay, adoption_delay(&s, &name, a)) {
            if r.fix_delay_days != (fix_day - eco.disclosed).max(0) as f64 {
                return Err(format!("{name}: fix delay {}", r.fix_delay_days));
            }
        }
        out.push(delay);
    }
    Ok(out)
}
