mod common;

use proptest::prelude::*;
use qakh::diagram::{Slice, TangleWord};
use qakh::Error;

fn parse(s: &str) -> Result<TangleWord, Error> {
    TangleWord::parse(s)
}

#[test]
fn parses_the_json_form() {
    let w = parse(r#"{"k":2,"r":3,"slices":[{"t":"x","i":1,"s":1},{"t":"cup","i":1},{"t":"cap","i":2}]}"#).unwrap();
    assert_eq!(w.k, 2);
    assert_eq!(w.r, 3);
    assert_eq!(w.slices, vec![Slice::Crossing { i: 1, sign: 1 }, Slice::Cup { i: 1 }, Slice::Cap { i: 2 }]);
    assert_eq!(w.widths(), vec![2, 2, 4, 2]);
}

#[test]
fn rejects_malformed_words() {
    let cases = [
        (r#"{"k":2,"r":3,"slices":[{"t":"y","i":1}]}"#, "schema"),
        (r#"{"k":2,"r":3,"slices":[{"t":"x","i":1,"s":2}]}"#, "schema"),
        (r#"{"k":2,"r":3,"slices":[{"t":"x","i":1}]}"#, "schema"),
        (r#"{"k":2,"r":3,"slices":[{"t":"cup","i":1,"s":1}]}"#, "schema"),
        (r#"{"k":-1,"r":3,"slices":[]}"#, "schema"),
        (r#"{"k":2,"r":3,"slices":[],"extra":1}"#, "schema"),
        (r#"{"k":2,"r":3,"slices":[{"t":"x","i":0,"s":1}]}"#, "range"),
        (r#"{"k":2,"r":3,"slices":[{"t":"x","i":2,"s":1}]}"#, "range"),
        (r#"{"k":0,"r":3,"slices":[{"t":"cap","i":1}]}"#, "balance"),
        (r#"{"k":0,"r":3,"slices":[{"t":"cup","i":1}]}"#, "balance"),
    ];
    for (text, kind) in cases {
        let err = parse(text).unwrap_err();
        let got = match err {
            Error::Schema(_) => "schema",
            Error::Range { .. } => "range",
            Error::Balance { .. } => "balance",
            ref other => panic!("unexpected {other:?}"),
        };
        assert_eq!(got, kind, "{text}");
        assert!(err.is_validation());
    }
}

#[test]
fn resolutions_of_small_closures() {
    // sigma1 closure: the 0-smoothing keeps two essential circles, the 1-smoothing one trivial circle.
    let w = TangleWord::braid(2, 0, &[(1, 1)]).unwrap();
    let id = w.resolve(&[false]).tangle.configuration().unwrap();
    let tb = w.resolve(&[true]).tangle.configuration().unwrap();
    assert_eq!((id.n_essential, id.n_trivial()), (2, 0));
    assert_eq!((tb.n_essential, tb.n_trivial()), (0, 1));
    let unknot = TangleWord::new(0, 0, vec![Slice::Cup { i: 1 }, Slice::Cap { i: 1 }]).unwrap();
    let c = unknot.resolve(&[]).tangle.configuration().unwrap();
    assert_eq!((c.n_essential, c.n_trivial(), c.generator_count()), (0, 1, 2));
    let essential = TangleWord::new(1, 0, vec![]).unwrap().resolve(&[]).tangle.configuration().unwrap();
    assert_eq!((essential.n_essential, essential.total_winding().abs()), (1, 1));
}

#[test]
fn grading_data_counts_signs() {
    let w = TangleWord::braid(3, 0, &[(1, 1), (2, -1), (1, 1)]).unwrap();
    let g = w.grading();
    assert_eq!((g.n_plus, g.n_minus), (2, 1));
    assert_eq!(w.crossing_slices(), vec![0, 1, 2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(seed in 0u64..10_000) {
        let w = common::random_words(seed, 1, 6).remove(0).with_r((seed % 7) as u32);
        prop_assert_eq!(TangleWord::parse(&w.to_json()).unwrap(), w);
    }

    #[test]
    fn every_resolution_traces(seed in 0u64..10_000, mask in 0usize..64) {
        let w = common::random_words(seed, 1, 6).remove(0);
        let n = w.crossing_count();
        let u: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let conf = w.resolve(&u).tangle.configuration().unwrap();
        // Essential circles all wind the same way and account for the k through strands.
        prop_assert_eq!(conf.total_winding().unsigned_abs() as usize, if w.k == 0 { 0 } else { conf.n_essential });
        prop_assert!(conf.n_essential <= w.k && (w.k - conf.n_essential).is_multiple_of(2));
    }
}
