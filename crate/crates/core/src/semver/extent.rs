use std::fmt;

use serde::{Deserialize, Serialize};

use super::range::{Op, RangeExpr};
use super::{SemverError, Version};

/// The widest release-type jump a range allows above its lowest satisfying
/// release.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateExtent {
    Exact,
    Patch,
    Minor,
    Major,
}

impl fmt::Display for UpdateExtent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateExtent::Exact => "exact",
            UpdateExtent::Patch => "patch",
            UpdateExtent::Minor => "minor",
            UpdateExtent::Major => "major",
        })
    }
}

const INF: u64 = u64::MAX;

/// A release triple where `INF` stands for "unbounded" in that component.
type Triple = (u64, u64, u64);

fn succ(t: Triple) -> Triple {
    (t.0, t.1, t.2.saturating_add(1))
}

fn pred(t: Triple) -> Option<Triple> {
    match t {
        (0, 0, 0) => None,
        (a, b, c) if c > 0 => Some((a, b, c - 1)),
        (a, b, _) if b > 0 => Some((a, b - 1, INF)),
        (a, _, _) => Some((a - 1, INF, INF)),
    }
}

/// Release-only bounds of one comparator set: inclusive lower triple and
/// inclusive upper triple (`None` = unbounded). `None` overall when the set
/// admits no release version.
fn release_bounds(set: &[super::range::Comparator]) -> Option<(Triple, Option<Triple>)> {
    let mut lower: Triple = (0, 0, 0);
    let mut upper: Option<Triple> = None;
    let tighten_upper = |upper: &mut Option<Triple>, t: Triple| {
        *upper = Some(upper.map_or(t, |u| u.min(t)));
    };
    for c in set {
        let t = c.version.triple();
        let pre = c.version.is_prerelease();
        match c.op {
            Op::Ge => lower = lower.max(t),
            Op::Gt => lower = lower.max(if pre { t } else { succ(t) }),
            Op::Le if pre => tighten_upper(&mut upper, pred(t)?),
            Op::Le => tighten_upper(&mut upper, t),
            Op::Lt => tighten_upper(&mut upper, pred(t)?),
            Op::Eq if pre => return None,
            Op::Eq => {
                lower = lower.max(t);
                tighten_upper(&mut upper, t);
            }
        }
    }
    match upper {
        Some(u) if u < lower => None,
        _ => Some((lower, upper)),
    }
}

/// Lowest release version (no prerelease) satisfying `range`, if any.
pub fn min_release(range: &RangeExpr) -> Option<Version> {
    range
        .sets()
        .iter()
        .filter_map(|set| release_bounds(set))
        .map(|(lower, _)| lower)
        .min()
        .map(|(a, b, c)| Version::new(a, b, c))
}

/// Computes the update extent of `range` measured from its lowest satisfying
/// release, or from `available_floor` when given (the floor must itself be a
/// satisfying release).
pub fn update_extent(range: &RangeExpr, available_floor: Option<&Version>) -> Result<UpdateExtent, SemverError> {
    let arms: Vec<_> = range.sets().iter().filter_map(|set| release_bounds(set)).collect();
    let Some(min) = arms.iter().map(|(lower, _)| *lower).min() else {
        return Err(SemverError::Unsatisfiable(range.raw().to_string()));
    };
    let floor = match available_floor {
        None => min,
        Some(f) => {
            if f.is_prerelease() || !range.satisfies(f, false) {
                return Err(SemverError::FloorOutsideRange { range: range.raw().to_string(), floor: f.to_string() });
            }
            f.triple()
        }
    };
    let mut top = floor;
    for (lower, upper) in &arms {
        match upper {
            None => return Ok(UpdateExtent::Major),
            Some(u) if *u >= floor && *lower <= *u => top = top.max(*u),
            Some(_) => {}
        }
    }
    Ok(if top == floor {
        UpdateExtent::Exact
    } else if top.0 == floor.0 && top.1 == floor.1 {
        UpdateExtent::Patch
    } else if top.0 == floor.0 {
        UpdateExtent::Minor
    } else {
        UpdateExtent::Major
    })
}
