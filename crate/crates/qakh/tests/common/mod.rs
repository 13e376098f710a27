#![allow(dead_code)]

use qakh::diagram::{Slice, TangleWord};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Random valid word with at most `max_crossings` crossings and at most 4 strands.
pub fn random_word(rng: &mut StdRng, max_crossings: usize) -> TangleWord {
    let k = rng.gen_range(0..=3usize);
    let target = rng.gen_range(1..=max_crossings);
    let mut m = k;
    let mut slices = Vec::new();
    let mut n = 0;
    let mut cups = 0;
    while n < target {
        let roll = rng.gen_range(0..10);
        if roll < 6 && m >= 2 {
            let i = rng.gen_range(1..m);
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            slices.push(Slice::Crossing { i, sign });
            n += 1;
        } else if roll < 8 && m < 4 && cups < 2 {
            slices.push(Slice::Cup { i: rng.gen_range(1..=m + 1) });
            m += 2;
            cups += 1;
        } else if m >= k + 2 && m >= 4 {
            slices.push(Slice::Cap { i: rng.gen_range(1..m) });
            m -= 2;
        } else if m < 2 {
            slices.push(Slice::Cup { i: rng.gen_range(1..=m + 1) });
            m += 2;
            cups += 1;
        }
    }
    while m > k {
        slices.push(Slice::Cap { i: rng.gen_range(1..m) });
        m -= 2;
    }
    TangleWord::new(k, 0, slices).expect("generated word is valid")
}

pub fn random_words(seed: u64, count: usize, max_crossings: usize) -> Vec<TangleWord> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_word(&mut rng, max_crossings)).collect()
}
