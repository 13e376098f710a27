use clap::{Args, Parser, Subcommand, ValueEnum};
use qakh::burnside::build_functor;
use qakh::checks::{run_checks, Check, CheckOutcome, SchemeOverride};
use qakh::cobordism_calc::derive_default_scheme;
use qakh::cobordism_maps::{compose_movie, match_jones_power, sweep_movie};
use qakh::complex::{build_complex, Ring};
use qakh::corpus::{load_corpus, regenerate};
use qakh::diagram::{Slice, TangleWord};
use qakh::homology::homology;
use qakh::Error;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qakh", version, about = "Quantum annular Khovanov homology over Z[q]/(q^r - 1)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Homology table of one diagram.
    Homology(Common),
    /// Run checks on one diagram, or on the whole bundled corpus without --input.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of: d2, hexagon, quotient, classical, kchain, uq2, boxes, typeIV.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Scalar induced by the sweep cobordism of a crossingless unlink.
    SweepJones(Common),
    /// Burnside functor of one diagram as JSON.
    BurnsideExport(Common),
    /// Scheme calibration, corpus integrity, golden values and all checks.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// Tangle word JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Modulus r; defaults to the word's own r field.
    #[arg(long)]
    r: Option<u32>,
    /// Weight scheme JSON file, e.g. {"wP": -2, "wN": -2}.
    #[arg(long)]
    scheme: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 14)]
    max_crossings: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

enum Failure {
    Error(Error),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<String, Failure>;

struct RunConfig {
    word: Option<TangleWord>,
    r: Option<u32>,
    scheme: SchemeOverride,
    format: Format,
    max_crossings: usize,
}

impl RunConfig {
    fn from_args(c: &Common) -> Result<Self, Error> {
        if let Some(j) = c.jobs {
            // The global pool can be set once per process; later calls keep the first setting.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
        }
        let read = |p: &PathBuf| {
            std::fs::read_to_string(p).map_err(|e| Error::Schema(format!("{}: {e}", p.display())))
        };
        let word = c.input.as_ref().map(|p| TangleWord::parse(&read(p)?)).transpose()?;
        let scheme = match &c.scheme {
            Some(p) => SchemeOverride::parse(&read(p)?)?,
            None => SchemeOverride::default(),
        };
        let cfg = RunConfig { word, r: c.r, scheme, format: c.format, max_crossings: c.max_crossings };
        if let Some(w) = &cfg.word {
            cfg.guard(w)?;
        }
        Ok(cfg)
    }

    fn guard(&self, w: &TangleWord) -> Result<(), Error> {
        let n = w.crossing_count();
        if n > self.max_crossings {
            return Err(Error::Guard { n, max: self.max_crossings });
        }
        Ok(())
    }

    fn word(&self) -> Result<&TangleWord, Error> {
        self.word.as_ref().ok_or_else(|| Error::Schema("--input is required".into()))
    }

    fn r_for(&self, w: &TangleWord) -> u32 {
        self.r.unwrap_or(w.r)
    }

    fn positive_r(&self, w: &TangleWord) -> Result<u32, Error> {
        match self.r_for(w) {
            0 => Err(Error::Schema("this command needs r >= 1 (pass --r)".into())),
            r => Ok(r),
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn cmd_homology(cfg: &RunConfig) -> Outcome {
    let w = cfg.word()?;
    let r = cfg.positive_r(w)?;
    let table = homology(&build_complex(w, r, &cfg.scheme.scheme)?);
    Ok(match cfg.format {
        Format::Text => format!("r = {r}\n{}", table.render_text()),
        Format::Json => pretty(&table.to_json()),
    })
}

fn parse_checks(names: &Option<Vec<String>>) -> Result<Vec<Check>, Error> {
    match names {
        None => Ok(Check::ALL.to_vec()),
        Some(v) => v.iter().map(|s| s.trim().parse()).collect(),
    }
}

fn cmd_verify(cfg: &RunConfig, checks: &[Check]) -> Outcome {
    let targets: Vec<(String, TangleWord)> = match &cfg.word {
        Some(w) => vec![("input".into(), w.clone())],
        None => load_corpus()?.into_iter().map(|e| (e.name, e.word)).collect(),
    };
    let mut report = Vec::new();
    for (name, w) in &targets {
        cfg.guard(w)?;
        let r = cfg.r.unwrap_or(if w.r == 0 { 3 } else { w.r });
        report.push((name.clone(), r, run_checks(w, r, &cfg.scheme, checks)?));
    }
    let passed = report.iter().all(|(_, _, o)| o.iter().all(|x| x.passed));
    let text = match cfg.format {
        Format::Json => pretty(&json!({
            "passed": passed,
            "entries": report.iter().map(|(n, r, o)| json!({"name": n, "r": r, "results": o})).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut s = String::new();
            for (name, r, outcomes) in &report {
                for o in outcomes {
                    s += &format!("{name} r={r} {}\n", outcome_line(o));
                }
            }
            s += if passed { "all checks passed\n" } else { "some checks failed\n" };
            s
        }
    };
    if passed {
        Ok(text)
    } else {
        Err(Failure::Checks(text))
    }
}

fn outcome_line(o: &CheckOutcome) -> String {
    let status = match (o.passed, o.vacuous) {
        (true, true) => "PASS (vacuous)",
        (true, false) => "PASS",
        _ => "FAIL",
    };
    format!("{:<9} {status}: {}", o.check.name(), o.detail)
}

fn cmd_sweep_jones(cfg: &RunConfig) -> Outcome {
    let w = cfg.word()?;
    let r = cfg.r_for(w);
    let map = compose_movie(&sweep_movie(w)?, r, &cfg.scheme.scheme)?;
    let value = map.scalar().ok_or_else(|| Error::Mismatch("sweep map is not 1x1".into()))?;
    let circles = w.slices.iter().filter(|s| matches!(s, Slice::Cup { .. })).count() as u32;
    let matched = match_jones_power(&value, circles, Ring::from_r(r));
    let value = Ring::from_r(r).normalize(&value);
    let form = match matched {
        Some((sign, c)) => format!("{}q^{c}(q+q^-1)^{circles}", if sign < 0 { "-" } else { "" }),
        None => "no match".into(),
    };
    let text = match cfg.format {
        Format::Json => pretty(&json!({
            "r": r, "components": circles, "scalar": value.to_string(),
            "match": matched.map(|(s, c)| json!({"sign": s, "power": c})),
        })),
        Format::Text => format!("r = {r}\ncomponents = {circles}\nscalar = {value}\nmatch = {form}\n"),
    };
    match matched {
        Some(_) => Ok(text),
        None => Err(Failure::Checks(text)),
    }
}

fn cmd_burnside_export(cfg: &RunConfig) -> Outcome {
    let w = cfg.word()?;
    let r = cfg.positive_r(w)?;
    Ok(pretty(&build_functor(w, r, &cfg.scheme.scheme)?.export_json()))
}

fn cmd_selftest(cfg: &RunConfig) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut note = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        lines.push(format!("{name:<18} {}: {detail}", if pass { "PASS" } else { "FAIL" }));
    };
    let scheme = derive_default_scheme()?;
    note("scheme", scheme == Default::default(), format!("derived ({}, {})", scheme.wp, scheme.wn));
    let corpus = load_corpus()?;
    note("corpus", corpus.len() >= 12, format!("{} entries, checksums verified", corpus.len()));
    let fresh = regenerate()?;
    let stale: Vec<&str> = corpus.iter().zip(&fresh).filter(|(a, b)| a != b).map(|(a, _)| a.name.as_str()).collect();
    note("golden values", stale.is_empty() && fresh.len() == corpus.len(), format!("stale: {stale:?}"));
    let mut failed = Vec::new();
    for e in &corpus {
        let r = cfg.r.unwrap_or(3);
        for o in run_checks(&e.word, r, &cfg.scheme, &Check::ALL)? {
            if !o.passed {
                failed.push(format!("{}:{}", e.name, o.check));
            }
        }
    }
    note("corpus checks", failed.is_empty(), format!("failed: {failed:?}"));
    let text = match cfg.format {
        Format::Json => pretty(&json!({ "passed": ok, "lines": lines })),
        Format::Text => lines.join("\n") + "\n",
    };
    if ok {
        Ok(text)
    } else {
        Err(Failure::Checks(text))
    }
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Homology(c) => cmd_homology(&RunConfig::from_args(c)?),
        Command::Verify { common, checks } => {
            let checks = parse_checks(checks)?;
            cmd_verify(&RunConfig::from_args(common)?, &checks)
        }
        Command::SweepJones(c) => cmd_sweep_jones(&RunConfig::from_args(c)?),
        Command::BurnsideExport(c) => cmd_burnside_export(&RunConfig::from_args(c)?),
        Command::Selftest(c) => cmd_selftest(&RunConfig::from_args(c)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Checks(out)) => {
            print!("{out}");
            ExitCode::from(3)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error [{}]: {e}", e.module());
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
