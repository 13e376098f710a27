use proptest::prelude::*;
use qakh::cobordism_calc::WeightScheme;
use qakh::cobordism_maps::*;
use qakh::complex::build_complex;
use qakh::diagram::{Slice, TangleWord};
use qakh::homology::homology;
use qakh::{Error, Laurent};

mod common;

fn sch() -> WeightScheme {
    WeightScheme::default()
}

fn word(k: usize, slices: Vec<Slice>) -> TangleWord {
    TangleWord::new(k, 0, slices).unwrap()
}

fn movie(start: &TangleWord, moves: &[Move]) -> Vec<ElementaryCobordism> {
    chain_moves(start, moves).unwrap()
}

fn sigma1_sq() -> TangleWord {
    TangleWord::braid(2, 0, &[(1, 1), (1, 1)]).unwrap()
}

/// Every move that applies to `w` somewhere, with its first legal location.
fn applicable_moves(w: &TangleWord) -> Vec<Move> {
    let widths = w.widths();
    let mut out = Vec::new();
    for l in 0..=w.slices.len() {
        for i in 1..=widths[l] + 1 {
            out.push(Move::Birth { slice: l, i });
            out.push(Move::SaddleMove { slice: l, i, remove: false });
            out.push(Move::R1 { slice: l, i, sign: 1 });
            out.push(Move::R1 { slice: l, i, sign: -1 });
            out.push(Move::R2 { slice: l, i, sign: 1 });
            out.push(Move::R2 { slice: l, i, sign: -1 });
        }
        for i in 1..=widths[l] {
            out.push(Move::SaddleMove { slice: l, i, remove: true });
        }
        out.push(Move::Death { slice: l, dotted: false });
        out.push(Move::Death { slice: l, dotted: true });
        out.push(Move::R1inv { slice: l });
        out.push(Move::R2inv { slice: l });
    }
    out.push(Move::SeamSlideArc { direction: SeamDirection::Up });
    out.push(Move::SeamSlideArc { direction: SeamDirection::Down });
    for v in [CrossingSlide::A, CrossingSlide::B, CrossingSlide::C, CrossingSlide::D] {
        out.push(Move::SeamSlideCrossing { variant: v });
    }
    out.into_iter().filter(|&m| ElementaryCobordism::new(w, m).is_ok()).collect()
}

/// Words whose resolutions put through strands on a trivial circle have no complex.
fn buildable(e: &ElementaryCobordism) -> bool {
    build_complex(&e.source, 0, &sch()).is_ok() && build_complex(&e.target, 0, &sch()).is_ok()
}

#[test]
fn birth_then_death_reads_off_the_dot() {
    let empty = word(0, vec![]);
    for r in [0, 2, 3] {
        let plain = compose_movie(&movie(&empty, &[Move::Birth { slice: 0, i: 1 }, Move::Death { slice: 0, dotted: false }]), r, &sch()).unwrap();
        let dotted = compose_movie(&movie(&empty, &[Move::Birth { slice: 0, i: 1 }, Move::Death { slice: 0, dotted: true }]), r, &sch()).unwrap();
        assert_eq!(plain.scalar().unwrap(), Laurent::zero());
        assert_eq!(dotted.scalar().unwrap(), Laurent::one());
    }
}

#[test]
fn birth_next_to_a_braid_is_a_chain_map() {
    let w = sigma1_sq();
    for l in 0..=2 {
        for i in 1..=3 {
            let e = ElementaryCobordism::new(&w, Move::Birth { slice: l, i }).unwrap();
            assert!(elementary_map(&e, 0, &sch()).unwrap().is_chain_map());
        }
    }
}

#[test]
fn type_iv_moves_compose_to_the_identity() {
    let cases = [
        (TangleWord::braid(2, 0, &[(1, 1)]).unwrap(), CrossingSlide::A, CrossingSlide::B),
        (TangleWord::braid(2, 0, &[(1, -1)]).unwrap(), CrossingSlide::C, CrossingSlide::D),
        (TangleWord::braid(2, 0, &[(1, 1), (1, -1), (1, 1)]).unwrap(), CrossingSlide::A, CrossingSlide::B),
        (TangleWord::braid(3, 0, &[(1, -1), (2, 1), (1, -1)]).unwrap(), CrossingSlide::C, CrossingSlide::D),
    ];
    for (w, up, down) in cases {
        for r in [0, 1, 3] {
            let there_and_back = movie(&w, &[Move::SeamSlideCrossing { variant: up }, Move::SeamSlideCrossing { variant: down }]);
            let m = compose_movie(&there_and_back, r, &sch()).unwrap();
            assert!(m.is_chain_map());
            assert!(m.is_identity(), "{up:?} then {down:?} on {}", w.to_json());
            let rotated = &there_and_back[0].target;
            let back_and_there = movie(rotated, &[Move::SeamSlideCrossing { variant: down }, Move::SeamSlideCrossing { variant: up }]);
            assert!(compose_movie(&back_and_there, r, &sch()).unwrap().is_identity());
        }
    }
}

#[test]
fn type_iv_turnback_smoothing_carries_a_q_power() {
    let w = TangleWord::braid(2, 0, &[(1, 1)]).unwrap();
    let e = ElementaryCobordism::new(&w, Move::SeamSlideCrossing { variant: CrossingSlide::A }).unwrap();
    let m = elementary_map(&e, 0, &sch()).unwrap();
    assert!(m.is_chain_map());
    let non_units = m.matrix.entries().filter(|(_, _, v)| v.as_monomial().map(|t| t.1 != 0).unwrap_or(true)).count();
    assert!(non_units > 0, "moving a crossing through the seam is not weight-free");
}

#[test]
fn reidemeister_inverse_after_move_is_identity() {
    let w = sigma1_sq();
    for r in [0, 3] {
        for (mv, inv) in [
            (Move::R1 { slice: 1, i: 1, sign: 1 }, Move::R1inv { slice: 1 }),
            (Move::R1 { slice: 0, i: 2, sign: -1 }, Move::R1inv { slice: 0 }),
            (Move::R2 { slice: 2, i: 1, sign: 1 }, Move::R2inv { slice: 2 }),
            (Move::R2 { slice: 0, i: 1, sign: -1 }, Move::R2inv { slice: 0 }),
        ] {
            let m = compose_movie(&movie(&w, &[mv, inv]), r, &sch()).unwrap();
            assert!(m.is_identity(), "{mv:?} then {inv:?}");
            let single = elementary_map(&ElementaryCobordism::new(&w, mv).unwrap(), r, &sch()).unwrap();
            assert!(single.is_chain_map());
            assert_eq!(single.shift.map(|s| (s.h, s.j, s.k)), Some((0, 0, 0)));
        }
    }
}

#[test]
fn reidemeister_moves_preserve_homology() {
    let w = sigma1_sq();
    for r in [2, 3] {
        let base = homology(&build_complex(&w.with_r(r), r, &sch()).unwrap()).fingerprint();
        for mv in [Move::R1 { slice: 1, i: 2, sign: 1 }, Move::R2 { slice: 1, i: 1, sign: -1 }] {
            let e = ElementaryCobordism::new(&w.with_r(r), mv).unwrap();
            let other = homology(&build_complex(&e.target, r, &sch()).unwrap()).fingerprint();
            assert_eq!(base, other, "{mv:?} at r = {r}");
        }
    }
}

#[test]
fn far_apart_births_commute() {
    let w = word(2, vec![]);
    let a = movie(&w, &[Move::Birth { slice: 0, i: 1 }, Move::Birth { slice: 2, i: 3 }]);
    let b = movie(&w, &[Move::Birth { slice: 0, i: 3 }, Move::Birth { slice: 0, i: 1 }]);
    assert_eq!(a[1].target, b[1].target);
    let ma = compose_movie(&a, 0, &sch()).unwrap();
    let mb = compose_movie(&b, 0, &sch()).unwrap();
    assert_eq!(ma.matrix, mb.matrix);
}

#[test]
fn empty_movie_is_the_identity_on_the_ground_ring() {
    for r in [0, 3] {
        let m = compose_movie(&[], r, &sch()).unwrap();
        assert!(m.is_identity());
        assert_eq!(m.scalar(), Some(Laurent::one()));
    }
}

#[test]
fn sweep_values_are_jones_polynomials_of_unlinks() {
    for m in 0..=3u32 {
        let mv = sweep_movie(&unlink_word(m as usize, 0)).unwrap();
        for r in [0, 1, 2, 3, 5] {
            let map = compose_movie(&mv, r, &sch()).unwrap();
            let v = map.scalar().unwrap();
            assert!(match_jones_power(&v, m, map.ring()).is_some(), "m = {m}, r = {r}: {v}");
        }
    }
    let v = compose_movie(&sweep_movie(&unlink_word(1, 0)).unwrap(), 0, &sch()).unwrap().scalar().unwrap();
    assert_eq!(v, Laurent::from_terms([(2, 1), (0, 1)]));
}

#[test]
fn sweep_has_the_expected_shape() {
    let tags: Vec<&str> = sweep_movie(&unlink_word(1, 0)).unwrap().iter().map(|e| e.tag()).collect();
    assert_eq!(tags, ["Birth", "SeamSlideArc", "SaddleMove", "SaddleMove", "SeamSlideArc", "Death"]);
}

#[test]
fn sweep_rejects_links_with_crossings() {
    let err = sweep_movie(&sigma1_sq()).unwrap_err();
    assert!(matches!(err, Error::UnsupportedLink(_)));
    assert!(matches!(sweep_movie(&word(1, vec![])).unwrap_err(), Error::UnsupportedLink(_)));
}

#[test]
fn location_errors() {
    let w = sigma1_sq();
    assert!(matches!(ElementaryCobordism::new(&w, Move::Death { slice: 0, dotted: false }), Err(Error::Location(_))));
    assert!(matches!(ElementaryCobordism::new(&w, Move::R1 { slice: 5, i: 1, sign: 1 }), Err(Error::Location(_))));
    assert!(matches!(ElementaryCobordism::new(&w, Move::R2 { slice: 0, i: 2, sign: 1 }), Err(Error::Location(_))));
    assert!(matches!(ElementaryCobordism::new(&w, Move::SeamSlideArc { direction: SeamDirection::Up }), Err(Error::Location(_))));
    assert!(matches!(ElementaryCobordism::new(&w, Move::SeamSlideCrossing { variant: CrossingSlide::C }), Err(Error::Location(_))));
    // A circle that wraps around the seam cannot be capped off by a death.
    let wrapped = word(2, vec![Slice::Cap { i: 1 }, Slice::Cup { i: 1 }]);
    let err = ElementaryCobordism::new(&wrapped, Move::Death { slice: 1, dotted: false }).unwrap_err();
    assert!(err.to_string().contains("crosses the seam"), "{err}");
}

#[test]
fn glue_errors_on_mismatched_movies() {
    let w = sigma1_sq();
    let a = ElementaryCobordism::new(&w, Move::R2 { slice: 0, i: 1, sign: 1 }).unwrap();
    let c = ElementaryCobordism::new(&w, Move::Birth { slice: 0, i: 1 }).unwrap();
    assert!(matches!(compose_movie(&[a, c], 0, &sch()), Err(Error::Glue(_))));
}

#[test]
fn movie_json_round_trip_and_r3_rejection() {
    let mv = sweep_movie(&unlink_word(2, 0)).unwrap();
    let text = movie_to_json(&mv);
    assert_eq!(parse_movie(&text).unwrap(), mv);
    let r3 = r#"{"source":{"k":3,"r":0,"slices":[]},"moves":[{"move":"R3","slice":0}]}"#;
    let err = parse_movie(r3).unwrap_err();
    assert!(matches!(err, Error::Location(_)));
    assert!(err.to_string().contains("Reidemeister III"));
}

#[test]
fn every_move_on_random_words_is_a_chain_map() {
    for w in common::random_words(11, 25, 3) {
        for mv in applicable_moves(&w) {
            let e = ElementaryCobordism::new(&w, mv).unwrap();
            if !buildable(&e) {
                continue;
            }
            let m = elementary_map(&e, 0, &sch()).unwrap();
            assert!(m.is_chain_map(), "{mv:?} on {}", w.to_json());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_elementary_maps_commute_with_differentials(seed in 0u64..10_000, pick in 0usize..1000, r in prop::sample::select(vec![0u32, 2, 3, 5])) {
        let w = common::random_words(seed, 1, 3).pop().unwrap();
        let moves = applicable_moves(&w);
        let e = ElementaryCobordism::new(&w, moves[pick % moves.len()]).unwrap();
        prop_assume!(buildable(&e));
        let m = elementary_map(&e, r, &sch()).unwrap();
        prop_assert!(m.is_chain_map());
    }

    #[test]
    fn prop_seam_slides_are_invertible(seed in 0u64..10_000, r in prop::sample::select(vec![0u32, 3])) {
        let w = common::random_words(seed, 1, 3).pop().unwrap();
        let (up, down) = match w.slices[0] {
            Slice::Crossing { sign: 1, .. } => (Move::SeamSlideCrossing { variant: CrossingSlide::A }, Move::SeamSlideCrossing { variant: CrossingSlide::B }),
            Slice::Crossing { .. } => (Move::SeamSlideCrossing { variant: CrossingSlide::C }, Move::SeamSlideCrossing { variant: CrossingSlide::D }),
            _ => (Move::SeamSlideArc { direction: SeamDirection::Up }, Move::SeamSlideArc { direction: SeamDirection::Down }),
        };
        let mv = movie(&w, &[up, down]);
        prop_assume!(mv.iter().all(buildable));
        prop_assert!(compose_movie(&mv, r, &sch()).unwrap().is_identity());
    }
}
