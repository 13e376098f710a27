mod common;

use proptest::prelude::*;
use qakh::burnside::{
    build_functor, build_functor_with, classical_functor, compare_with_classical, diagonal_iso, k_automorphism,
    LadybugPolicy,
};
use qakh::cobordism_calc::WeightScheme;
use qakh::complex::{build_complex, classical_complex, Ring};
use qakh::diagram::TangleWord;
use qakh::Error;
use std::collections::BTreeSet;

fn sch() -> WeightScheme {
    WeightScheme::default()
}

fn ladybug3() -> TangleWord {
    TangleWord::braid(2, 0, &[(1, -1), (1, 1), (1, 1)]).unwrap()
}

#[test]
fn policies_by_modulus() {
    assert_eq!(LadybugPolicy::for_r(1), LadybugPolicy::Classical);
    assert_eq!(LadybugPolicy::for_r(2), LadybugPolicy::LeftPair);
    assert_eq!(LadybugPolicy::for_r(3), LadybugPolicy::Forced);
    assert!(matches!(build_functor(&ladybug3(), 0, &sch()), Err(Error::Domain(_))));
}

#[test]
fn ladybug_faces_store_matchings() {
    for r in [1, 2, 3, 5] {
        let f = build_functor(&ladybug3(), r, &sch()).unwrap();
        assert!(f.verify_hexagons().passed());
        assert!(f.verify_inverse_symmetry().is_empty());
        let cert = compare_with_classical(&f, &ladybug3()).unwrap();
        assert_eq!(cert.ladybug_faces, 2);
        if r > 2 {
            assert!(f.forced_vs_left().unwrap().iter().all(|(_, agree)| *agree));
        }
    }
}

#[test]
fn right_pair_breaks_the_quotient_comparison() {
    let w = ladybug3();
    let f = build_functor(&w, 2, &sch()).unwrap();
    let faces: BTreeSet<_> = f.matchings.keys().copied().collect();
    assert_eq!(faces.len(), 2);
    let flipped = build_functor_with(&w, 2, &sch(), &faces).unwrap();
    assert_ne!(flipped.matchings, f.matchings);
    assert!(flipped.verify_hexagons().passed());
    assert!(matches!(compare_with_classical(&flipped, &w), Err(Error::Mismatch(_))));
}

#[test]
fn totalization_recovers_both_complexes() {
    let w = TangleWord::braid(2, 0, &[(1, 1), (1, 1), (1, 1)]).unwrap();
    let classical = classical_functor(&w).unwrap().totalize();
    assert!(classical.same_differential(&classical_complex(&w).unwrap(), Ring::from_r(1)));
    let f = build_functor(&w, 4, &sch()).unwrap();
    assert!(f.totalize().same_differential(&build_complex(&w, 4, &sch()).unwrap(), Ring::from_r(4)));
}

#[test]
fn export_is_deterministic() {
    let a = build_functor(&ladybug3(), 2, &sch()).unwrap().export_json();
    let b = build_functor(&ladybug3(), 2, &sch()).unwrap().export_json();
    assert_eq!(a.to_string(), b.to_string());
    assert_eq!(a["edges"].as_array().unwrap().len(), 12);
    assert_eq!(a["matchings"].as_array().unwrap().len(), 2);
    // For r > 2 every fiber is separated by q-powers and nothing needs storing.
    let forced = build_functor(&ladybug3(), 3, &sch()).unwrap().export_json();
    assert_eq!(forced["matchings"].as_array().unwrap().len(), 0);
}

#[test]
fn schemes_give_diagonally_isomorphic_functors() {
    let w = ladybug3();
    let f0 = build_functor(&w, 3, &sch()).unwrap();
    let f1 = build_functor(&w, 3, &WeightScheme::new(1, 0)).unwrap();
    let (_, cert) = diagonal_iso(&f1, &f0).unwrap();
    assert_eq!(cert.vertices, 8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functor_laws_on_random_words(seed in 0u64..100_000, r in 1u32..6) {
        let w = common::random_words(seed, 1, 5).remove(0);
        let f = build_functor(&w, r, &sch()).unwrap();
        prop_assert!(f.verify_hexagons().passed());
        prop_assert!(compare_with_classical(&f, &w).is_ok());
        prop_assert!(k_automorphism(&f, false).is_ok() && k_automorphism(&f, true).is_ok());
        prop_assert!(f.totalize().same_differential(&build_complex(&w, r, &sch()).unwrap(), Ring::from_r(r)));
    }
}
