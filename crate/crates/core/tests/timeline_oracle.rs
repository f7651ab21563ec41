//! Adoption timelines checked against a day-by-day simulation.

#[path = "support/mini_eco.rs"]
mod mini_eco;

use depsmell::vuln::adoption_delay;
use mini_eco::{compare, Eco, Mini, Triple};
use proptest::prelude::*;

fn check(eco: &Eco) -> Result<Option<f64>, TestCaseError> {
    compare(eco).map(|d| d[0]).map_err(TestCaseError::fail)
}

fn run(eco: &Eco) -> Option<f64> {
    check(eco).unwrap_or_else(|e| panic!("{e}: {eco:?}"))
}

#[test]
fn caret_dependent_adopts_on_fix_day() {
    let eco = Eco {
        lib: vec![((1, 0, 0), 0), ((1, 0, 1), 10), ((1, 1, 0), 30)],
        fix_index: 1,
        disclosed: 3,
        apps: vec![vec![(2, Some(Mini::Caret((1, 0, 0))))]],
        horizon: 90,
    };
    assert_eq!(run(&eco), Some(0.0));
}

#[test]
fn pinned_dependent_updates_after_thirty_days() {
    let eco = Eco {
        lib: vec![((1, 0, 0), 0), ((1, 0, 1), 10)],
        fix_index: 1,
        disclosed: 10,
        apps: vec![vec![
            (2, Some(Mini::Pin((1, 0, 0)))),
            (25, Some(Mini::Pin((1, 0, 0)))),
            (40, Some(Mini::Pin((1, 0, 1)))),
        ]],
        horizon: 90,
    };
    assert_eq!(run(&eco), Some(30.0));
}

#[test]
fn pinned_dependent_never_updates() {
    let eco = Eco {
        lib: vec![((2, 3, 0), 0), ((2, 4, 0), 5), ((3, 0, 0), 10)],
        fix_index: 2,
        disclosed: 1,
        apps: vec![vec![(1, Some(Mini::Tilde((2, 3, 0)))), (50, Some(Mini::Caret((2, 3, 0))))]],
        horizon: 100,
    };
    assert_eq!(run(&eco), Some(90.0));
    let s = eco.snapshot();
    assert!(adoption_delay(&s, "app0", s.advisory("ADV").unwrap()).unwrap().censored);
}

#[test]
fn dependent_published_after_fix_is_not_exposed() {
    let eco = Eco {
        lib: vec![((1, 0, 0), 0), ((1, 0, 1), 10)],
        fix_index: 1,
        disclosed: 0,
        apps: vec![vec![(12, Some(Mini::Pin((1, 0, 0))))]],
        horizon: 30,
    };
    assert_eq!(run(&eco), None);
}

#[test]
fn pin_to_unpublished_version_waits_for_next_downstream_release() {
    let eco = Eco {
        lib: vec![((1, 0, 0), 0), ((1, 1, 0), 10), ((1, 1, 1), 20)],
        fix_index: 1,
        disclosed: 0,
        apps: vec![vec![
            (1, Some(Mini::Pin((1, 0, 0)))),
            (10, Some(Mini::Pin((1, 1, 1)))),
            (45, Some(Mini::Pin((1, 1, 1)))),
        ]],
        horizon: 60,
    };
    assert_eq!(run(&eco), Some(35.0));
}

#[test]
fn dropping_the_dependency_is_not_adoption() {
    let eco = Eco {
        lib: vec![((0, 1, 0), 0), ((0, 2, 0), 10)],
        fix_index: 1,
        disclosed: 0,
        apps: vec![vec![(1, Some(Mini::Caret((0, 1, 0)))), (20, None), (60, Some(Mini::AtLeast((0, 1, 0))))]],
        horizon: 80,
    };
    assert_eq!(run(&eco), Some(50.0));
}

// (day, constraint kind, index of the base version in the library history)
fn arb_history(lib_len: usize) -> impl Strategy<Value = Vec<(i64, u8, usize)>> {
    (prop::collection::btree_set(0i64..120, 1..6), prop::collection::vec((0u8..5, 0..lib_len), 6))
        .prop_map(|(days, specs)| days.into_iter().zip(specs).map(|(d, (kind, pick))| (d, kind, pick)).collect())
}

fn constraint(kind: u8, base: Triple) -> Option<Mini> {
    match kind {
        0 => Some(Mini::Pin(base)),
        1 => Some(Mini::Caret(base)),
        2 => Some(Mini::Tilde(base)),
        3 => Some(Mini::AtLeast(base)),
        _ => None,
    }
}

fn arb_eco() -> impl Strategy<Value = Eco> {
    (prop::collection::vec((0u8..3, 1i64..12), 2..7), any::<prop::sample::Index>(), 0i64..40, 0u64..2).prop_flat_map(
        |(steps, fix_pick, disclosed, start_major)| {
            let mut v = (start_major, 1, 0);
            let mut d = 0;
            let mut lib = vec![(v, d)];
            for (bump, gap) in steps {
                v = match bump {
                    0 => (v.0, v.1, v.2 + 1),
                    1 => (v.0, v.1 + 1, 0),
                    _ => (v.0 + 1, 0, 0),
                };
                d += gap;
                lib.push((v, d));
            }
            let fix_index = 1 + fix_pick.index(lib.len() - 1);
            prop::collection::vec(arb_history(lib.len()), 1..4).prop_map(move |apps| {
                let apps = apps
                    .into_iter()
                    .map(|h| h.into_iter().map(|(d, kind, pick)| (d, constraint(kind, lib[pick].0))).collect())
                    .collect();
                Eco { lib: lib.clone(), fix_index, disclosed, apps, horizon: 150 }
            })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_day_stepping_oracle(eco in arb_eco()) {
        compare(&eco).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn widening_never_delays_adoption(eco in arb_eco()) {
        let narrow = compare(&eco).map_err(TestCaseError::fail)?;
        let wide = compare(&eco.widened()).map_err(TestCaseError::fail)?;
        for (n, w) in narrow.iter().zip(&wide) {
            if let (Some(n), Some(w)) = (n, w) {
                prop_assert!(w <= n, "caret {w} > pinned {n}");
            }
        }
    }
}
