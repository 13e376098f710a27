use qakh::checks::{run_checks, Check, SchemeOverride};
use qakh::corpus::{load_corpus, load_corpus_from, regenerate, sha256_hex, write_corpus, CorpusEntry, Provenance, CORPUS_DIR};
use qakh::Error;
use std::fs;
use std::path::PathBuf;

fn scratch_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qakh-corpus-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    for f in fs::read_dir(CORPUS_DIR).unwrap() {
        let f = f.unwrap();
        fs::copy(f.path(), d.join(f.file_name())).unwrap();
    }
    d
}

#[test]
fn bundled_corpus_loads() {
    let c = load_corpus().unwrap();
    assert!(c.len() >= 12);
    let names: Vec<&str> = c.iter().map(|e| e.name.as_str()).collect();
    for want in ["empty_link", "unknot", "essential_unknot", "unknot_r1", "unknot_r2", "unknot_seam_slide", "sigma1_1", "sigma1_2", "sigma1_3", "sigma1_4", "ladybug3"] {
        assert!(names.contains(&want), "{want} missing");
    }
    assert!(c.iter().filter(|e| e.name.starts_with("local_")).count() >= 5);
    assert!(c.iter().any(|e| e.ladybug && e.word.crossing_count() == 3));
}

#[test]
fn every_expectation_carries_a_provenance() {
    for e in load_corpus().unwrap() {
        assert!(!e.expected.is_empty());
        assert_eq!(e.expected("crossings").unwrap().as_u64().unwrap() as usize, e.word.crossing_count());
        assert!(e.expected.iter().filter(|x| x.property == "fingerprint_r3").all(|x| x.provenance == Provenance::Derived));
    }
}

#[test]
fn golden_values_regenerate_identically() {
    let fresh = regenerate().unwrap();
    let stored = load_corpus().unwrap();
    assert_eq!(fresh.len(), stored.len());
    for (a, b) in fresh.iter().zip(&stored) {
        assert_eq!(a, b, "{}", a.name);
        assert_eq!(a.to_json(), b.to_json());
    }
}

#[test]
fn entries_round_trip_through_json() {
    for e in load_corpus().unwrap() {
        assert_eq!(CorpusEntry::parse(&e.to_json()).unwrap(), e);
    }
}

#[test]
fn every_entry_passes_the_default_checks() {
    for e in load_corpus().unwrap() {
        let outcomes = run_checks(&e.word, 3, &SchemeOverride::default(), &Check::ALL).unwrap();
        let stored: Vec<String> =
            serde_json::from_value(e.expected("checks_passed_r3").unwrap().clone()).unwrap();
        assert_eq!(stored.len(), Check::ALL.len(), "{}", e.name);
        assert!(outcomes.iter().all(|o| o.passed), "{}: {outcomes:?}", e.name);
    }
}

#[test]
fn tampering_is_detected() {
    let d = scratch_dir("tamper");
    let victim = fs::read_dir(&d).unwrap().map(|f| f.unwrap().path()).find(|p| p.extension().is_some_and(|x| x == "json")).unwrap();
    let text = fs::read_to_string(&victim).unwrap().replace("\"ladybug\": false", "\"ladybug\": true");
    fs::write(&victim, text).unwrap();
    assert!(matches!(load_corpus_from(&d), Err(Error::Corpus(m)) if m.contains("checksum")));
    fs::remove_dir_all(&d).unwrap();
}

#[test]
fn unlisted_files_are_rejected() {
    let d = scratch_dir("extra");
    fs::write(d.join("99_extra.json"), "{}").unwrap();
    assert!(matches!(load_corpus_from(&d), Err(Error::Corpus(m)) if m.contains("not in the manifest")));
    fs::remove_dir_all(&d).unwrap();
}

#[test]
fn written_corpus_reloads() {
    let d = std::env::temp_dir().join(format!("qakh-corpus-write-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    let entries = load_corpus().unwrap();
    write_corpus(&d, &entries).unwrap();
    assert_eq!(load_corpus_from(&d).unwrap(), entries);
    fs::remove_dir_all(&d).unwrap();
}

#[test]
fn sha256_of_known_input() {
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
