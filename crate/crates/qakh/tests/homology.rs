mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use qakh::cobordism_calc::WeightScheme;
use qakh::complex::build_complex;
use qakh::diagram::{Slice, TangleWord};
use qakh::homology::{cyclotomic, free_ranks_by_gauss, homology, invariant_factors, rank_q, smith_normal_form, IntMatrix};

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[test]
fn smith_forms_of_small_matrices() {
    assert_eq!(invariant_factors(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]])), big(&[1, 6]));
    assert_eq!(invariant_factors(&IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]])), big(&[2, 4]));
    assert_eq!(invariant_factors(&IntMatrix::from_rows(&[vec![0, 0], vec![0, 0]])), big(&[]));
    assert_eq!(rank_q(&IntMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6]])), 1);
}

#[test]
fn cyclotomic_polynomials() {
    assert_eq!(cyclotomic(1), vec![-1, 1]);
    assert_eq!(cyclotomic(2), vec![1, 1]);
    assert_eq!(cyclotomic(3), vec![1, 1, 1]);
    assert_eq!(cyclotomic(4), vec![1, 0, 1]);
    assert_eq!(cyclotomic(6), vec![1, -1, 1]);
}

#[test]
fn unknot_is_kr_in_two_degrees() {
    let w = TangleWord::new(0, 0, vec![Slice::Cup { i: 1 }, Slice::Cap { i: 1 }]).unwrap();
    let h = homology(&build_complex(&w, 4, &WeightScheme::default()).unwrap());
    assert_eq!(h.groups.keys().copied().collect::<Vec<_>>(), vec![(0, -1, 0), (0, 1, 0)]);
    for g in h.groups.values() {
        assert_eq!(g.free_rank, 4);
        assert_eq!(g.charpoly, vec![-1, 0, 0, 0, 1]);
        assert_eq!(g.cyclotomic_multiplicities.values().sum::<usize>(), 3);
    }
    assert!(h.render_text().contains("x^4 - 1"));
}

#[test]
fn sigma1_cubed_has_two_torsion() {
    let w = TangleWord::braid(2, 0, &[(1, 1), (1, 1), (1, 1)]).unwrap();
    let h = homology(&build_complex(&w, 3, &WeightScheme::default()).unwrap());
    let g = &h.groups[&(3, 7, 0)];
    assert_eq!((g.free_rank, g.torsion.clone()), (0, vec!["2".to_string()]));
    assert_eq!(h.fingerprint_shifted(1, 2).matches("(4,9,0)").count(), 1);
}

#[test]
fn json_lists_every_group() {
    let w = TangleWord::braid(2, 0, &[(1, 1), (1, 1)]).unwrap();
    let h = homology(&build_complex(&w, 3, &WeightScheme::default()).unwrap());
    let v = h.to_json();
    assert_eq!(v["groups"].as_array().unwrap().len(), h.groups.len());
    assert_eq!(v["r"], 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn smith_transforms_are_consistent(rows in prop::collection::vec(prop::collection::vec(-9i64..10, 4), 1..5)) {
        let m = IntMatrix::from_rows(&rows);
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
        let f = s.invariant_factors();
        prop_assert_eq!(f.len(), rank_q(&m));
        for pair in f.windows(2) {
            prop_assert!((&pair[1] % &pair[0]) == BigInt::from(0));
        }
    }

    /// Free ranks from the Smith path agree with rational elimination.
    #[test]
    fn free_ranks_agree_with_gauss(seed in 0u64..100_000, r in 1u32..5) {
        let w = common::random_words(seed, 1, 5).remove(0);
        let c = build_complex(&w, r, &WeightScheme::default()).unwrap();
        let h = homology(&c);
        let gauss: Vec<_> = free_ranks_by_gauss(&c).into_iter().filter(|e| e.1 > 0).collect();
        let smith: Vec<_> = h.groups.iter().filter(|(_, g)| g.free_rank > 0).map(|(k, g)| (*k, g.free_rank)).collect();
        prop_assert_eq!(gauss, smith);
    }
}
