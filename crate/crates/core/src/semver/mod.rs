//! SemVer versions and npm-style range expressions.
//!
//! Ranges are desugared into disjunctions of comparator sets on parse; the
//! evaluation rules (prerelease gating in particular) follow npm's reference
//! `semver` package, and the test suite replays a corpus recorded from it.

mod extent;
mod range;
mod version;

pub use extent::{min_release, update_extent, UpdateExtent};
pub use range::{max_satisfying, min_satisfying, parse_range, satisfies, Comparator, ComparatorSet, Op, RangeExpr};
pub use version::{diff_release_type, parse_version, Identifier, ReleaseType, Version};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemverError {
    #[error("cannot parse {input:?} at byte {offset}: {reason}")]
    Parse { input: String, offset: usize, reason: String },
    #[error("range {0:?} admits no release version")]
    Unsatisfiable(String),
    #[error("floor {floor} does not satisfy range {range:?}")]
    FloorOutsideRange { range: String, floor: String },
}
