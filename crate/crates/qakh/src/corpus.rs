//! Bundled input diagrams with golden values, guarded by a sha256 manifest.

use crate::burnside::{build_functor, compare_with_classical};
use crate::checks::{run_checks, Check, SchemeOverride};
use crate::cobordism_calc::WeightScheme;
use crate::cobordism_maps::{
    compose_movie, match_jones_power, sweep_movie, CrossingSlide, ElementaryCobordism, Move, SeamDirection,
};
use crate::complex::{build_complex, Ring};
use crate::diagram::{Slice, TangleWord};
use crate::error::{Error, Result};
use crate::homology::homology;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const CORPUS_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
pub const MANIFEST: &str = "MANIFEST.sha256";
/// Modulus at which golden homology and check outcomes are recorded.
pub const GOLDEN_R: u32 = 3;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Stated in the reference literature.
    Reference,
    /// Immediate from the definitions.
    Trivial,
    /// Produced by this engine after cross-validation.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub property: String,
    pub value: Value,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub word: TangleWord,
    /// Entries in one family are isotopic and share homology.
    pub family: Option<String>,
    pub ladybug: bool,
    pub expected: Vec<Expectation>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    name: String,
    word: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    ladybug: bool,
    expected: Vec<Expectation>,
}

impl CorpusEntry {
    pub fn expected(&self, property: &str) -> Option<&Value> {
        self.expected.iter().find(|e| e.property == property).map(|e| &e.value)
    }

    pub fn to_json(&self) -> String {
        let raw = RawEntry {
            name: self.name.clone(),
            word: serde_json::from_str(&self.word.to_json()).expect("word json"),
            family: self.family.clone(),
            ladybug: self.ladybug,
            expected: self.expected.clone(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("entry json");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawEntry = serde_json::from_str(text).map_err(|e| Error::Corpus(e.to_string()))?;
        let word = TangleWord::parse(&raw.word.to_string())?;
        Ok(Self { name: raw.name, word, family: raw.family, ladybug: raw.ladybug, expected: raw.expected })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

pub fn load_corpus() -> Result<Vec<CorpusEntry>> {
    load_corpus_from(Path::new(CORPUS_DIR))
}

/// Reads the manifest, checks every listed file's digest and that no entry is unlisted.
pub fn load_corpus_from(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let io = |e: std::io::Error| Error::Corpus(format!("{}: {e}", dir.display()));
    let manifest = fs::read_to_string(dir.join(MANIFEST)).map_err(io)?;
    let mut listed = BTreeSet::new();
    let mut out = Vec::new();
    for line in manifest.lines().filter(|l| !l.trim().is_empty()) {
        let (digest, file) = line
            .split_once("  ")
            .ok_or_else(|| Error::Corpus(format!("malformed manifest line {line:?}")))?;
        let bytes = fs::read(dir.join(file)).map_err(io)?;
        if sha256_hex(&bytes) != digest {
            return Err(Error::Corpus(format!("{file}: checksum mismatch")));
        }
        let text = String::from_utf8(bytes).map_err(|_| Error::Corpus(format!("{file}: not UTF-8")))?;
        let entry = CorpusEntry::parse(&text).map_err(|e| Error::Corpus(format!("{file}: {e}")))?;
        listed.insert(file.to_string());
        out.push(entry);
    }
    for f in fs::read_dir(dir).map_err(io)? {
        let name = f.map_err(io)?.file_name().to_string_lossy().into_owned();
        if name.ends_with(".json") && !listed.contains(&name) {
            return Err(Error::Corpus(format!("{name} is not in the manifest")));
        }
    }
    Ok(out)
}

/// Writes one file per entry plus the manifest.
pub fn write_corpus(dir: &Path, entries: &[CorpusEntry]) -> Result<()> {
    let io = |e: std::io::Error| Error::Corpus(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut manifest = String::new();
    for (i, e) in entries.iter().enumerate() {
        let file = format!("{:02}_{}.json", i, e.name);
        let text = e.to_json();
        fs::write(dir.join(&file), &text).map_err(io)?;
        writeln!(manifest, "{}  {file}", sha256_hex(text.as_bytes())).unwrap();
    }
    fs::write(dir.join(MANIFEST), manifest).map_err(io)
}

fn chain(start: &TangleWord, moves: &[Move]) -> Result<TangleWord> {
    moves.iter().try_fold(start.clone(), |w, &m| Ok(ElementaryCobordism::new(&w, m)?.target))
}

fn flat(k: usize, slices: Vec<Slice>) -> Result<TangleWord> {
    TangleWord::new(k, 0, slices)
}

/// Name, word and isotopy family of every bundled entry, in corpus order.
pub fn seed_words() -> Result<Vec<(String, TangleWord, Option<String>)>> {
    use Slice::{Cap, Cup};
    let unknot = flat(0, vec![Cup { i: 1 }, Cap { i: 1 }])?;
    let s2 = TangleWord::braid(2, 0, &[(1, 1), (1, 1)])?;
    let r1 = Move::R1 { slice: 1, i: 1, sign: 1 };
    let up = Move::SeamSlideArc { direction: SeamDirection::Up };
    let slide = |v| Move::SeamSlideCrossing { variant: v };
    let fam = |s: &str| Some(s.to_string());
    let mut out = vec![
        ("empty_link".into(), flat(0, vec![])?, None),
        ("unknot".into(), unknot.clone(), fam("unknot")),
        ("unknot_r1".into(), chain(&unknot, &[r1])?, fam("unknot")),
        ("unknot_r2".into(), chain(&unknot, &[Move::R2 { slice: 1, i: 1, sign: 1 }])?, fam("unknot")),
        ("unknot_seam_slide".into(), chain(&unknot, &[up])?, fam("unknot")),
        ("unknot_crossing_through_seam".into(), chain(&unknot, &[r1, up, up, slide(CrossingSlide::A)])?, fam("unknot")),
        ("essential_unknot".into(), flat(1, vec![])?, fam("essential_unknot")),
        (
            "essential_unknot_r1".into(),
            flat(1, vec![Cup { i: 2 }, Slice::Crossing { i: 1, sign: 1 }, Cap { i: 2 }])?,
            fam("essential_unknot"),
        ),
        ("unlink2".into(), flat(0, vec![Cup { i: 1 }, Cup { i: 3 }, Cap { i: 3 }, Cap { i: 1 }])?, None),
    ];
    for n in 1..=4 {
        let w = TangleWord::braid(2, 0, &vec![(1, 1); n])?;
        out.push((format!("sigma1_{n}"), w, if n == 2 { fam("sigma1_2") } else { None }));
    }
    let r2 = chain(&s2, &[Move::R2 { slice: 0, i: 1, sign: 1 }])?;
    let s2_r1 = chain(&s2, &[Move::R1 { slice: 0, i: 1, sign: 1 }])?;
    out.extend([
        ("sigma1_2_r1".into(), s2_r1.clone(), fam("sigma1_2")),
        ("sigma1_2_r2".into(), r2.clone(), fam("sigma1_2")),
        ("sigma1_2_seam_slide".into(), chain(&s2_r1, &[up])?, fam("sigma1_2")),
        ("sigma1_2_crossing_through_seam".into(), chain(&r2, &[slide(CrossingSlide::A)])?, fam("sigma1_2")),
        ("ladybug3".into(), TangleWord::braid(2, 0, &[(1, -1), (1, 1), (1, 1)])?, None),
    ]);
    for (name, w) in local_configurations()? {
        out.push((name, w, None));
    }
    Ok(out)
}

/// One-crossing diagrams whose single saddle realizes each local saddle type.
fn local_configurations() -> Result<Vec<(String, TangleWord)>> {
    use Slice::{Cap, Crossing, Cup};
    let x = |sign| Crossing { i: 1, sign };
    let kink = |k: usize, sign| flat(k, vec![Cup { i: k + 1 }, Crossing { i: k, sign }, Cap { i: k + 1 }]);
    let trivial_kink = |sign| flat(0, vec![Cup { i: 1 }, Cup { i: 3 }, Crossing { i: 2, sign }, Cap { i: 1 }, Cap { i: 1 }]);
    Ok(vec![
        ("local_merge_trivial".into(), trivial_kink(1)?),
        ("local_split_trivial".into(), trivial_kink(-1)?),
        ("local_merge_into_essential".into(), kink(1, 1)?),
        ("local_split_off_essential".into(), kink(1, -1)?),
        ("local_merge_essentials".into(), flat(2, vec![x(1)])?),
        ("local_split_into_essentials".into(), flat(2, vec![x(-1)])?),
    ])
}

/// Golden values for one word, computed by the engine and the independent oracles.
pub fn golden(name: &str, word: &TangleWord, family: Option<String>) -> Result<CorpusEntry> {
    let scheme = WeightScheme::default();
    let mut expected = Vec::new();
    let mut push = |property: &str, value: Value, provenance| {
        expected.push(Expectation { property: property.into(), value, provenance })
    };
    push("crossings", json!(word.crossing_count()), Provenance::Trivial);

    let c = build_complex(word, GOLDEN_R, &scheme)?;
    let h = homology(&c);
    push("fingerprint_r3", json!(h.fingerprint()), Provenance::Derived);
    if family.as_deref() == Some("unknot") || family.as_deref() == Some("essential_unknot") {
        let support: Vec<[i64; 3]> = h.groups.keys().map(|&(a, b, c)| [a, b, c]).collect();
        push("support_r3", json!(support), Provenance::Reference);
    }
    let kinds: BTreeSet<String> = c.edges.iter().map(|e| format!("{:?}", e.kind)).collect();
    push("saddle_types", json!(kinds), Provenance::Derived);

    let outcomes = run_checks(word, GOLDEN_R, &SchemeOverride::default(), &Check::ALL)?;
    let passed: Vec<&str> = outcomes.iter().filter(|o| o.passed).map(|o| o.check.name()).collect();
    push("checks_passed_r3", json!(passed), Provenance::Derived);

    let f = build_functor(word, GOLDEN_R, &scheme)?;
    let ladybugs = compare_with_classical(&f, word)?.ladybug_faces;
    push("ladybug_faces", json!(ladybugs), Provenance::Derived);

    if word.k == 0 && word.crossing_count() == 0 {
        let m = compose_movie(&sweep_movie(word)?, GOLDEN_R, &scheme)?;
        let value = m.scalar().ok_or_else(|| Error::Mismatch("sweep map is not a scalar".into()))?;
        let circles = word.slices.iter().filter(|s| matches!(s, Slice::Cup { .. })).count();
        let matched = match_jones_power(&value, circles as u32, Ring::from_r(GOLDEN_R));
        let provenance = if circles <= 1 { Provenance::Reference } else { Provenance::Derived };
        push("sweep_jones_r3", json!(matched), provenance);
    }
    Ok(CorpusEntry { name: name.into(), word: word.clone(), family, ladybug: ladybugs > 0, expected })
}

/// The full corpus regenerated from scratch.
pub fn regenerate() -> Result<Vec<CorpusEntry>> {
    seed_words()?.into_iter().map(|(n, w, f)| golden(&n, &w, f)).collect()
}
