mod common;

use proptest::prelude::*;
use qakh::cobordism_calc::{
    calibration_suite, classical_saddle, derive_default_scheme, eval_saddle, saddle_type, scheme_passes,
    GeneratorLabel, SaddleType, WeightScheme,
};
use qakh::complex::crossing_positions;
use qakh::diagram::{site_at, Slice, TangleWord};

#[test]
fn derived_scheme_is_the_pinned_default() {
    assert_eq!(derive_default_scheme().unwrap(), WeightScheme::default());
    assert_eq!(WeightScheme::default(), WeightScheme::new(-2, -2));
}

#[test]
fn every_consistent_scheme_passes_calibration() {
    // The standardization weight changes the basis by a coboundary, so no scheme is singled out
    // beyond consistency; the least one is taken.
    let suite = calibration_suite();
    for a in -2..=2 {
        for b in -2..=2 {
            let s = WeightScheme::new(a, b);
            assert!(s.is_consistent());
            assert!(scheme_passes(&s, &suite).unwrap(), "({a}, {b})");
        }
    }
}

#[test]
fn scheme_json_round_trip() {
    let s = WeightScheme::new(1, -2);
    assert_eq!(s.to_json(), r#"{"wP":1,"wN":-2}"#);
    assert_eq!(WeightScheme::from_json(&s.to_json()).unwrap(), s);
    assert!(WeightScheme::from_json(r#"{"wP":1}"#).is_err());
}

#[test]
fn generator_labels_and_degrees() {
    let g = GeneratorLabel::from_index(0b101, 2, 1);
    assert_eq!(g.essential, vec![false, true]);
    assert_eq!(g.trivial, vec![false]);
    assert_eq!((g.adeg(), g.qdeg(), g.index()), (0, -1, 0b101));
    assert_eq!(g.to_string(), "v-⊗v+⊗w-");
    assert_eq!(GeneratorLabel::from_index(0, 0, 0).to_string(), "1");
}

fn one_crossing(k: usize, slices: Vec<Slice>) -> (TangleWord, SaddleType) {
    let w = TangleWord::new(k, 0, slices).unwrap();
    let conf = w.resolve(&[false]).tangle.configuration().unwrap();
    let (s, p) = crossing_positions(&w)[0];
    let kind = saddle_type(&conf, &site_at(&conf, 0, s, p)).unwrap();
    (w, kind)
}

#[test]
fn local_saddle_types() {
    use Slice::{Cap, Crossing, Cup};
    let trivial = |sign| vec![Cup { i: 1 }, Cup { i: 3 }, Crossing { i: 2, sign }, Cap { i: 1 }, Cap { i: 1 }];
    let cases = [
        (0, trivial(1), SaddleType::MergeTrivial),
        (0, trivial(-1), SaddleType::SplitTrivial),
        (1, vec![Cup { i: 2 }, Crossing { i: 1, sign: 1 }, Cap { i: 2 }], SaddleType::MergeIntoEssential),
        (1, vec![Cup { i: 2 }, Crossing { i: 1, sign: -1 }, Cap { i: 2 }], SaddleType::SplitOffEssential),
        (2, vec![Crossing { i: 1, sign: 1 }], SaddleType::MergeEssentials),
        (2, vec![Crossing { i: 1, sign: -1 }], SaddleType::SplitIntoEssentials),
    ];
    for (k, slices, want) in cases {
        assert_eq!(one_crossing(k, slices).1, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// At q = 1 the quantum saddle agrees with the independent classical formulas.
    #[test]
    fn quantum_saddle_specializes_to_classical(seed in 0u64..10_000, mask in 0usize..64, pick in 0usize..8) {
        let w = common::random_words(seed, 1, 6).remove(0);
        let n = w.crossing_count();
        let c = pick % n;
        let u: Vec<bool> = (0..n).map(|i| i != c && mask >> i & 1 == 1).collect();
        let conf = w.resolve(&u).tangle.configuration().unwrap();
        let (s, p) = crossing_positions(&w)[c];
        let site = site_at(&conf, c, s, p);
        let quantum = eval_saddle(&conf, &site, &WeightScheme::default()).unwrap().matrix;
        let classical = classical_saddle(&conf, &site).unwrap();
        for (col, entries) in classical.iter().enumerate() {
            let mut want: Vec<(usize, i64)> = entries.iter().copied().filter(|e| e.1 != 0).collect();
            want.sort();
            let mut got: Vec<(usize, i64)> =
                quantum.column(col).iter().map(|(r, v)| (*r, v.eval_one())).filter(|e| e.1 != 0).collect();
            got.sort();
            prop_assert_eq!(got, want);
        }
    }
}
