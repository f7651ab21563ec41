//! Replays the range corpus recorded from npm's `semver` package
//! (see fixtures/semver/record_corpus.js) and checks order/extent laws.

use std::cmp::Ordering;

use depsmell::semver::{
    diff_release_type, max_satisfying, parse_range, parse_version, satisfies, update_extent, Identifier, RangeExpr,
    Version,
};
use proptest::prelude::*;

#[path = "support/semver_corpus.rs"]
mod semver_corpus;

use semver_corpus::{corpus, folded_diff};

#[test]
fn satisfies_matches_reference_corpus() {
    let corpus = corpus();
    assert!(corpus.satisfies.len() >= 200);
    let mut failures = Vec::new();
    for case in &corpus.satisfies {
        let range = parse_range(&case.range).unwrap_or_else(|e| panic!("{}: {e}", case.range));
        let version = parse_version(&case.version).unwrap();
        let got = satisfies(&version, &range, case.include_prerelease);
        if got != case.verdict {
            failures.push(format!(
                "{} vs {:?} (incl_pre={}): expected {}, got {} [{}]",
                case.version,
                case.range,
                case.include_prerelease,
                case.verdict,
                got,
                range.desugared()
            ));
        }
    }
    assert!(failures.is_empty(), "{} mismatches:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn max_satisfying_matches_reference_corpus() {
    let corpus = corpus();
    assert!(corpus.max_satisfying.len() >= 50);
    for case in &corpus.max_satisfying {
        let range = parse_range(&case.range).unwrap();
        let versions: Vec<Version> = case.versions.iter().map(|v| parse_version(v).unwrap()).collect();
        let got = max_satisfying(&versions, &range, false).map(ToString::to_string);
        assert_eq!(got, case.max, "range {:?} over {:?}", case.range, case.versions);
    }
}

#[test]
fn range_validity_matches_reference_corpus() {
    for case in corpus().range_validity {
        assert_eq!(parse_range(&case.range).is_ok(), case.valid, "{:?}", case.range);
    }
}

#[test]
fn diff_matches_reference_corpus() {
    let cases = corpus().diff;
    assert!(cases.len() >= 20);
    for case in cases {
        let expected = folded_diff(case.diff.as_deref());
        let got = diff_release_type(&parse_version(&case.a).unwrap(), &parse_version(&case.b).unwrap());
        assert_eq!(got, expected, "{} -> {}", case.a, case.b);
    }
}

#[test]
fn precedence_matches_reference_corpus() {
    for case in corpus().compare {
        let expected = case.ordering.cmp(&0);
        let got = parse_version(&case.a).unwrap().cmp(&parse_version(&case.b).unwrap());
        assert_eq!(got, expected, "{} vs {}", case.a, case.b);
    }
}

fn identifier() -> impl Strategy<Value = Identifier> {
    prop_oneof![(0u64..50).prop_map(Identifier::Numeric), "[a-z][a-z0-9-]{0,5}".prop_map(Identifier::AlphaNumeric),]
}

fn version() -> impl Strategy<Value = Version> {
    (0u64..5, 0u64..5, 0u64..5, prop::collection::vec(identifier(), 0..3), prop::collection::vec("[a-z0-9]{1,4}", 0..2))
        .prop_map(|(major, minor, patch, prerelease, build)| Version { major, minor, patch, prerelease, build })
}

fn release() -> impl Strategy<Value = Version> {
    (0u64..4, 0u64..4, 0u64..4).prop_map(|(a, b, c)| Version::new(a, b, c))
}

fn range_text() -> impl Strategy<Value = String> {
    let op = prop_oneof![Just(""), Just("^"), Just("~"), Just(">="), Just(">"), Just("<"), Just("<=")];
    (op, 0u64..4, 0u64..4, 0u64..4).prop_map(|(op, a, b, c)| format!("{op}{a}.{b}.{c}"))
}

proptest! {
    #[test]
    fn format_parse_round_trip(v in version()) {
        let back = parse_version(&v.to_string()).unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert_eq!(back.build, v.build);
    }

    #[test]
    fn ordering_is_a_total_order(a in version(), b in version(), c in version()) {
        prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
        if a <= b && b <= c {
            prop_assert!(a <= c);
        }
        let mut sorted = vec![a, b, c];
        sorted.sort();
        let mut again = sorted.clone();
        again.sort();
        prop_assert_eq!(sorted, again);
    }

    #[test]
    fn max_satisfying_is_sound(vs in prop::collection::vec(version(), 0..12), r in range_text()) {
        let range = parse_range(&r).unwrap();
        match max_satisfying(&vs, &range, false) {
            Some(best) => {
                prop_assert!(vs.contains(best));
                prop_assert!(satisfies(best, &range, false));
                for v in &vs {
                    if v.cmp(best) == Ordering::Greater {
                        prop_assert!(!satisfies(v, &range, false));
                    }
                }
            }
            None => prop_assert!(vs.iter().all(|v| !satisfies(v, &range, false))),
        }
    }

    /// Intersecting a range with an upper bound above its floor shrinks the
    /// satisfaction set while keeping the minimum; the extent must not grow.
    #[test]
    fn extent_is_monotone_under_narrowing(r in range_text(), cap in release()) {
        let wide = parse_range(&r).unwrap();
        let Ok(wide_extent) = update_extent(&wide, None) else { return Ok(()); };
        let narrow: RangeExpr = parse_range(&format!("{r} <={cap}")).unwrap();
        let floor = depsmell::semver::min_release(&wide).unwrap();
        if cap >= floor {
            let narrow_extent = update_extent(&narrow, None).unwrap();
            prop_assert!(narrow_extent <= wide_extent, "{} {:?} > {} {:?}", narrow, narrow_extent, r, wide_extent);
        }
    }
}
