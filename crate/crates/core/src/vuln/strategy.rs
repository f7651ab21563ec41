use std::fmt;

use serde::{Deserialize, Serialize};

use crate::manifest::{classify_spec, ConstraintSpec};
use crate::semver::{min_release, update_extent, UpdateExtent, Version};

/// How much update freedom a dependency constraint hands to the resolver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyClass {
    Balanced,
    Restrictive,
    Permissive,
    Unclassified,
}

impl fmt::Display for StrategyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyClass::Balanced => "balanced",
            StrategyClass::Restrictive => "restrictive",
            StrategyClass::Permissive => "permissive",
            StrategyClass::Unclassified => "unclassified",
        })
    }
}

/// Classifies a constraint given the minimum version it admits.
///
/// Post-1.0.0: exact or patch-only is restrictive, minor is balanced, major
/// is permissive. Pre-1.0.0: only an exact constraint (no automatic
/// updates) is balanced; any automatic update is permissive. Note the
/// asymmetry: a pinned `0.2.3` is balanced while a pinned `1.2.3` is
/// restrictive.
pub fn classify_update_strategy(spec: &ConstraintSpec, resolved_floor: &Version) -> StrategyClass {
    let Some(range) = spec.range() else {
        return StrategyClass::Unclassified;
    };
    let extent = match update_extent(range, Some(resolved_floor)).or_else(|_| update_extent(range, None)) {
        Ok(e) => e,
        Err(_) => return StrategyClass::Unclassified,
    };
    if resolved_floor.major >= 1 {
        match extent {
            UpdateExtent::Exact | UpdateExtent::Patch => StrategyClass::Restrictive,
            UpdateExtent::Minor => StrategyClass::Balanced,
            UpdateExtent::Major => StrategyClass::Permissive,
        }
    } else {
        match extent {
            UpdateExtent::Exact => StrategyClass::Balanced,
            _ => StrategyClass::Permissive,
        }
    }
}

/// Classifies a raw constraint string, using its lowest satisfying release
/// as the floor.
pub fn classify_constraint(raw: &str) -> StrategyClass {
    let spec = classify_spec(raw);
    match spec.range().and_then(min_release) {
        Some(floor) => classify_update_strategy(&spec, &floor),
        None => StrategyClass::Unclassified,
    }
}
