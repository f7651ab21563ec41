//! Rank statistics checked against brute-force computations.

use depsmell::vuln::stats::{mann_whitney_u, spearman};
use proptest::prelude::*;

#[path = "support/rank_ref.rs"]
mod rank_ref;

use rank_ref::reference_p;

#[test]
fn mixed_eight_point_fixture() {
    let a = [1.0, 3.0, 3.0, 7.0];
    let b = [2.0, 3.0, 5.0, 8.0];
    let (u, p) = reference_p(&a, &b);
    let r = mann_whitney_u(&a, &b).unwrap();
    assert_eq!(r.u, u);
    assert_eq!(r.u + r.u_other, 16.0);
    assert!((r.p_two_sided - p).abs() < 1e-9, "{} vs {p}", r.p_two_sided);
}

#[test]
fn separated_samples() {
    let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
    assert_eq!(r.u, 0.0);
    let (_, p) = reference_p(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]);
    assert!((r.p_two_sided - p).abs() < 1e-9);
    assert!(r.p_two_sided < 0.1);
}

proptest! {
    #[test]
    fn mann_whitney_matches_enumeration(
        a in prop::collection::vec(0u8..6, 1..6),
        b in prop::collection::vec(0u8..6, 1..6),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let (u, p) = reference_p(&a, &b);
        let r = mann_whitney_u(&a, &b).unwrap();
        prop_assert_eq!(r.u, u);
        prop_assert!((r.p_two_sided - p).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.p_two_sided));
    }

    #[test]
    fn spearman_is_rank_invariant(xs in prop::collection::vec(-100i32..100, 3..20), seed in any::<u64>()) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.5 + ((i as u64 ^ seed) % 7) as f64).collect();
        let cubed: Vec<f64> = xs.iter().map(|x| x * x * x + 3.0).collect();
        match (spearman(&xs, &ys), spearman(&cubed, &ys)) {
            (Ok(r1), Ok(r2)) => {
                prop_assert!((r1 - r2).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&r1));
            }
            (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
            (r1, r2) => prop_assert!(false, "{:?} vs {:?}", r1, r2),
        }
    }
}
