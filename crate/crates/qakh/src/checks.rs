//! Named verification checks shared by the command line and the acceptance suite.

use crate::burnside::{build_functor, compare_with_classical, k_automorphism, BurnsideFunctor};
use crate::cobordism_calc::WeightScheme;
use crate::cobordism_maps::{compose_movie, rotate_up, CrossingSlide, ElementaryCobordism, Move};
use crate::complex::{build_complex_corrupted, classical_complex, CubeComplex, Ring};
use crate::diagram::{Slice, TangleWord};
use crate::error::{Error, Result};
use crate::{boxes, uq};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Box dimension used by the box audit.
pub const BOX_DIM: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Check {
    #[serde(rename = "d2")]
    D2,
    #[serde(rename = "hexagon")]
    Hexagon,
    #[serde(rename = "quotient")]
    Quotient,
    #[serde(rename = "classical")]
    Classical,
    #[serde(rename = "kchain")]
    KChain,
    #[serde(rename = "uq2")]
    Uq2,
    #[serde(rename = "boxes")]
    Boxes,
    #[serde(rename = "typeIV")]
    TypeIv,
}

impl Check {
    pub const ALL: [Check; 8] =
        [Check::D2, Check::Hexagon, Check::Quotient, Check::Classical, Check::KChain, Check::Uq2, Check::Boxes, Check::TypeIv];

    pub fn name(self) -> &'static str {
        match self {
            Check::D2 => "d2",
            Check::Hexagon => "hexagon",
            Check::Quotient => "quotient",
            Check::Classical => "classical",
            Check::KChain => "kchain",
            Check::Uq2 => "uq2",
            Check::Boxes => "boxes",
            Check::TypeIv => "typeIV",
        }
    }

    fn needs_functor(self) -> bool {
        matches!(self, Check::Hexagon | Check::Quotient | Check::KChain | Check::Boxes)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Schema(format!("unknown check {s:?}")))
    }
}

/// A weight scheme read from a file, optionally with one edge deliberately corrupted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeOverride {
    #[serde(flatten)]
    pub scheme: WeightScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt_edge: Option<usize>,
}

impl SchemeOverride {
    pub fn parse(text: &str) -> Result<Self> {
        let s: SchemeOverride = serde_json::from_str(text).map_err(|e| Error::Schema(format!("scheme: {e}")))?;
        if !s.scheme.is_consistent() {
            return Err(Error::Schema(format!("scheme ({}, {}) is inconsistent", s.scheme.wp, s.scheme.wn)));
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub passed: bool,
    /// Passed because the check has nothing to look at on this input.
    pub vacuous: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(check: Check, passed: bool, detail: impl Into<String>) -> Self {
        Self { check, passed, vacuous: false, detail: detail.into() }
    }

    fn vacuous(check: Check, detail: impl Into<String>) -> Self {
        Self { check, passed: true, vacuous: true, detail: detail.into() }
    }
}

/// Runs `checks` on one diagram; complexes and functors are built once and shared.
pub fn run_checks(word: &TangleWord, r: u32, scheme: &SchemeOverride, checks: &[Check]) -> Result<Vec<CheckOutcome>> {
    let complex = build_complex_corrupted(word, r, &scheme.scheme, scheme.corrupt_edge)?;
    let functor = if r >= 1 && checks.iter().any(|c| c.needs_functor()) {
        Some(build_functor(word, r, &scheme.scheme)?)
    } else {
        None
    };
    checks.iter().map(|&c| run_one(c, word, r, scheme, &complex, functor.as_ref())).collect()
}

fn run_one(
    check: Check,
    word: &TangleWord,
    r: u32,
    scheme: &SchemeOverride,
    c: &CubeComplex,
    f: Option<&BurnsideFunctor>,
) -> Result<CheckOutcome> {
    let Some(f) = f.filter(|_| check.needs_functor()) else {
        if check.needs_functor() {
            return Ok(CheckOutcome::vacuous(check, "no group action at r = 0"));
        }
        return simple_check(check, word, r, scheme, c);
    };
    Ok(match check {
        Check::Hexagon => {
            if f.n() < 3 {
                return Ok(CheckOutcome::vacuous(check, format!("no 3-dimensional faces (n = {})", f.n())));
            }
            let rep = f.verify_hexagons();
            CheckOutcome::new(check, rep.passed(), format!("{rep:?}"))
        }
        Check::Quotient => match compare_with_classical(f, word) {
            Ok(cert) => CheckOutcome::new(check, true, format!("{cert:?}")),
            Err(e) => CheckOutcome::new(check, false, e.to_string()),
        },
        Check::KChain => {
            let chain = uq::check_k_chain(c);
            let burnside = k_automorphism(f, false).and_then(|_| k_automorphism(f, true));
            let detail = match &burnside {
                Ok(_) => format!("{chain:?}"),
                Err(e) => format!("{chain:?}; {e}"),
            };
            CheckOutcome::new(check, chain.passed() && burnside.is_ok(), detail)
        }
        Check::Boxes => {
            let audit = boxes::audit_functor(f, BOX_DIM);
            let census = boxes::cell_census(f, BOX_DIM);
            let mut failures = audit.failures.clone();
            failures.extend(census.failures.iter().cloned());
            let detail = format!(
                "{} correspondences, {} pullbacks, {} quotients, {} incidences; {} failures",
                audit.correspondences,
                audit.pullbacks,
                audit.quotients,
                census.incidence_checked,
                failures.len()
            );
            CheckOutcome::new(check, audit.passed() && census.passed(), detail)
        }
        _ => unreachable!("functor checks only"),
    })
}

fn simple_check(check: Check, word: &TangleWord, r: u32, scheme: &SchemeOverride, c: &CubeComplex) -> Result<CheckOutcome> {
    Ok(match check {
        Check::D2 => {
            let bad = c.verify_d_squared();
            CheckOutcome::new(check, bad.is_empty(), format!("{} of {} faces fail", bad.len(), c.faces().len()))
        }
        Check::Classical => {
            let classical = classical_complex(word)?;
            let ok = c.specialize_q1().same_differential(&classical, Ring::from_r(1));
            CheckOutcome::new(check, ok, format!("{} edges compared", c.edges.len()))
        }
        Check::Uq2 => {
            let rep = uq::verify_relations(r);
            let failed: Vec<&str> = rep.relations.iter().filter(|x| !x.passed()).map(|x| x.relation.as_str()).collect();
            CheckOutcome::new(check, rep.passed(), format!("failed relations: {failed:?}"))
        }
        Check::TypeIv => type_iv(word, r, &scheme.scheme)?,
        _ => unreachable!("complex checks only"),
    })
}

/// Rotates the first crossing to the bottom slice, pushes it through the seam and back.
fn type_iv(word: &TangleWord, r: u32, scheme: &WeightScheme) -> Result<CheckOutcome> {
    let check = Check::TypeIv;
    let Some(at) = word.slices.iter().position(|s| matches!(s, Slice::Crossing { .. })) else {
        return Ok(CheckOutcome::vacuous(check, "no crossings"));
    };
    let mut w = word.clone();
    for _ in 0..at {
        w = rotate_up(&w);
    }
    let (up, down) = match w.slices[0] {
        Slice::Crossing { sign, .. } if sign > 0 => (CrossingSlide::A, CrossingSlide::B),
        _ => (CrossingSlide::C, CrossingSlide::D),
    };
    let first = ElementaryCobordism::new(&w, Move::SeamSlideCrossing { variant: up });
    let Ok(first) = first else {
        return Ok(CheckOutcome::vacuous(check, "first crossing cannot pass the seam"));
    };
    let second = ElementaryCobordism::new(&first.target, Move::SeamSlideCrossing { variant: down })?;
    let tag = format!("{} then {}", first.mv.tag(), second.mv.tag());
    Ok(match compose_movie(&[first, second], r, scheme) {
        Ok(m) => CheckOutcome::new(check, m.is_chain_map() && m.is_identity(), tag),
        Err(Error::Topology(e)) => CheckOutcome::vacuous(check, format!("rotated word has no complex: {e}")),
        Err(e) => return Err(e),
    })
}
