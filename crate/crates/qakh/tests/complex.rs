mod common;

use proptest::prelude::*;
use qakh::cobordism_calc::WeightScheme;
use qakh::complex::{build_complex, build_complex_corrupted, classical_complex, Ring};
use qakh::diagram::TangleWord;

fn sch() -> WeightScheme {
    WeightScheme::default()
}

#[test]
fn cube_shape() {
    let w = TangleWord::braid(2, 0, &[(1, 1), (1, 1), (1, 1)]).unwrap();
    let c = build_complex(&w, 3, &sch()).unwrap();
    assert_eq!(c.n(), 3);
    assert_eq!(c.vertices.len(), 8);
    assert_eq!(c.edges.len(), 12);
    assert_eq!(c.faces().len(), 6);
    // Two essential circles at the all-zero vertex, one trivial circle after one turnback.
    assert_eq!(c.vertices[0].rank(), 4);
    assert_eq!(c.vertices[1].rank(), 2);
}

#[test]
fn corrupted_edge_breaks_d_squared() {
    let w = TangleWord::braid(2, 0, &[(1, 1), (1, 1)]).unwrap();
    for r in [0, 3, 5] {
        assert!(build_complex(&w, r, &sch()).unwrap().verify_d_squared().is_empty());
        assert!(!build_complex_corrupted(&w, r, &sch(), Some(0)).unwrap().verify_d_squared().is_empty());
    }
}

#[test]
fn complexes_commute_before_signs() {
    let w = TangleWord::braid(2, 0, &[(1, -1), (1, 1), (1, 1)]).unwrap();
    let c = build_complex(&w, 0, &sch()).unwrap();
    assert!(c.verify_commuting().is_empty());
}

#[test]
fn ring_reduction() {
    let c = build_complex(&TangleWord::braid(2, 0, &[(1, 1), (1, 1)]).unwrap(), 0, &sch()).unwrap();
    let c3 = c.change_ring(Ring::from_r(3));
    let direct = build_complex(&c.word, 3, &sch()).unwrap();
    assert!(c3.same_differential(&direct, Ring::from_r(3)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn d_squared_vanishes(seed in 0u64..100_000, r in prop::sample::select(vec![0u32, 1, 2, 3, 4, 5, 7])) {
        let w = common::random_words(seed, 1, 6).remove(0);
        prop_assert!(build_complex(&w, r, &sch()).unwrap().verify_d_squared().is_empty());
    }

    #[test]
    fn specializes_to_classical(seed in 0u64..100_000) {
        let w = common::random_words(seed, 1, 6).remove(0);
        let q = build_complex(&w, 0, &sch()).unwrap().specialize_q1();
        prop_assert!(q.same_differential(&classical_complex(&w).unwrap(), Ring::from_r(1)));
    }

    /// The differential raises h by one and preserves the quantum and annular gradings.
    #[test]
    fn differential_is_homogeneous(seed in 0u64..100_000) {
        let w = common::random_words(seed, 1, 6).remove(0);
        let c = build_complex(&w, 0, &sch()).unwrap();
        for e in &c.edges {
            for (row, col, _) in e.matrix.entries() {
                let (s, t) = (c.tridegree(e.from, col), c.tridegree(e.to, row));
                prop_assert_eq!((t.h, t.j, t.k), (s.h + 1, s.j, s.k));
            }
        }
    }

    #[test]
    fn saddle_ratios_hold(seed in 0u64..100_000) {
        let w = common::random_words(seed, 1, 6).remove(0);
        prop_assert!(build_complex(&w, 0, &sch()).unwrap().saddle_ratio_violations().is_empty());
    }
}
