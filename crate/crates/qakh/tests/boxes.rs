mod common;

use num_rational::BigRational;
use proptest::prelude::*;
use qakh::boxes::{assign_boxes, audit_functor, big_box, cell_census, pullback, BoxK};
use qakh::burnside::build_functor;
use qakh::cobordism_calc::WeightScheme;
use qakh::diagram::TangleWord;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn box_geometry() {
    let unit = BoxK::cube(2, q(0, 1), q(1, 1));
    let left = BoxK { axes: vec![(q(0, 1), q(1, 2)), (q(0, 1), q(1, 1))] };
    let right = BoxK { axes: vec![(q(1, 2), q(1, 1)), (q(0, 1), q(1, 1))] };
    assert!(unit.contains(&left) && unit.contains(&right));
    assert!(left.disjoint(&right), "boxes sharing a face have disjoint interiors");
    assert!(!left.disjoint(&unit));
    let big = big_box(2, 3, (2, 1));
    assert_eq!(big.axes[0], (q(10, 1), q(11, 1)));
    assert_eq!(left.embed_in(&big).normalize_in(&big), left);
    assert!(!BoxK { axes: vec![(q(1, 1), q(1, 1))] }.has_interior());
}

#[test]
fn pullbacks_along_a_path_stay_disjoint() {
    let w = TangleWord::braid(2, 0, &[(1, 1), (1, 1), (1, 1)]).unwrap();
    let f = build_functor(&w, 3, &WeightScheme::default()).unwrap();
    let e01 = f.edge(0, 0);
    let e12 = f.edge(1, 1);
    let e23 = f.edge(3, 2);
    let a = assign_boxes(e01, &f.vertices[0], 2);
    let b = assign_boxes(e12, &f.vertices[1], 2);
    let c = assign_boxes(e23, &f.vertices[3], 2);
    assert!(a.violations().is_empty());
    let ab = pullback(&a, &b);
    let abc = pullback(&ab, &c);
    assert!(ab.violations().is_empty());
    assert!(abc.violations().is_empty());
    assert_eq!(ab.members.len() % 3, 0);
    assert_eq!(ab.quotient().members.len() * 3, ab.members.len());
}

#[test]
fn audit_and_census_on_a_ladybug_diagram() {
    let w = TangleWord::braid(2, 0, &[(1, -1), (1, 1), (1, 1)]).unwrap();
    for r in [1, 2, 4] {
        let f = build_functor(&w, r, &WeightScheme::default()).unwrap();
        let audit = audit_functor(&f, 2);
        assert!(audit.passed(), "{:?}", audit.failures);
        assert_eq!(audit.correspondences, 12);
        let census = cell_census(&f, 2);
        assert!(census.passed(), "{:?}", census.failures);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_functors_have_equivariant_boxes(seed in 0u64..100_000, r in 1u32..4, k in 1usize..3) {
        let w = common::random_words(seed, 1, 4).remove(0);
        let f = build_functor(&w, r, &WeightScheme::default()).unwrap();
        prop_assert!(audit_functor(&f, k).passed());
        prop_assert!(cell_census(&f, k).passed());
    }
}
