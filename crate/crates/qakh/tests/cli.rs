use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qakh"))
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("qakh-cli-{}-{name}", std::process::id()));
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SIGMA2: &str = r#"{"k":2,"r":3,"slices":[{"t":"x","i":1,"s":1},{"t":"x","i":1,"s":1}]}"#;
const UNKNOT: &str = r#"{"k":0,"r":3,"slices":[{"t":"cup","i":1},{"t":"cap","i":1}]}"#;
const ESSENTIAL: &str = r#"{"k":1,"r":3,"slices":[]}"#;

#[test]
fn homology_tables() {
    let u = write("unknot.json", UNKNOT);
    let o = run(&["homology", "--input", u.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("   0    1    0      3"), "{text}");
    assert!(text.contains("   0   -1    0      3"), "{text}");

    let e = write("essential.json", ESSENTIAL);
    let o = run(&["homology", "--input", e.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ks: Vec<i64> = v["groups"].as_array().unwrap().iter().map(|g| g["k"].as_i64().unwrap()).collect();
    assert_eq!(ks, vec![-1, 1]);

    let cube = write("sigma3.json", r#"{"k":2,"r":3,"slices":[{"t":"x","i":1,"s":1},{"t":"x","i":1,"s":1},{"t":"x","i":1,"s":1}]}"#);
    assert!(stdout(&run(&["homology", "--input", cube.to_str().unwrap()])).contains("Z/2"));
}

#[test]
fn verify_exit_codes() {
    let s = write("s2.json", SIGMA2);
    let ok = run(&["verify", "--input", s.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("hexagon   PASS (vacuous)"));

    let bad = write("bad_scheme.json", r#"{"wP":-2,"wN":-2,"corrupt_edge":1}"#);
    let o = run(&["verify", "--input", s.to_str().unwrap(), "--scheme", bad.to_str().unwrap(), "--checks", "d2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("d2        FAIL"));

    let o = run(&["verify", "--input", s.to_str().unwrap(), "--checks", "bogus"]);
    assert_eq!(o.status.code(), Some(2));

    let malformed = write("malformed.json", r#"{"k":0,"r":3,"slices":[{"t":"cap","i":1}]}"#);
    let o = run(&["homology", "--input", malformed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("annular_diagram"));

    let o = run(&["homology", "--input", s.to_str().unwrap(), "--max-crossings", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_whole_corpus_is_deterministic() {
    let a = run(&["verify", "--format", "json", "--jobs", "1"]);
    let b = run(&["verify", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["entries"].as_array().unwrap().len() >= 12);
}

#[test]
fn sweep_jones_reports() {
    let u = write("sweep_unknot.json", UNKNOT);
    let o = run(&["sweep-jones", "--input", u.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(q+q^-1)^1"));
    let empty = write("empty.json", r#"{"k":0,"r":0,"slices":[]}"#);
    let o = run(&["sweep-jones", "--input", empty.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["scalar"], "1");
    let s = write("sweep_s2.json", SIGMA2);
    assert_eq!(run(&["sweep-jones", "--input", s.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn burnside_export_and_selftest() {
    let s = write("export.json", SIGMA2);
    let o = run(&["burnside-export", "--input", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["r"], 3);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
