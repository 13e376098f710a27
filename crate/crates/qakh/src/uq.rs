//! The operators K, K^-1, E, F on configuration modules.
//!
//! K acts on every module and commutes with the differential. E and F are
//! only specified on part of the two-strand module V⊗V ⊕ W; unspecified
//! columns stay `None` and relation checks skip every column that needs one.

use crate::cobordism_calc::{adeg_of, WeightScheme};
use crate::cobordism_maps::total_differential;
use crate::complex::{build_complex, CubeComplex, Ring};
use crate::diagram::{Configuration, TangleWord};
use crate::scalar::Laurent;
use serde::Serialize;
use std::collections::BTreeMap;

type Column = BTreeMap<usize, Laurent>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UqOperator {
    pub name: String,
    pub basis: Vec<String>,
    /// `columns[x]` is the image of basis vector x, or `None` if unspecified.
    pub columns: Vec<Option<Column>>,
    /// Change of annular degree on every specified nonzero entry.
    pub adeg_shift: i64,
}

impl UqOperator {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn image(&self, x: usize) -> Option<&Column> {
        self.columns[x].as_ref()
    }

    /// Image of a vector, if every column it needs is specified.
    pub fn apply(&self, v: &Column) -> Option<Column> {
        let mut out = Column::new();
        for (x, c) in v {
            for (y, d) in self.image(*x)? {
                *out.entry(*y).or_default() += &(c * d);
            }
        }
        out.retain(|_, c| !c.is_zero());
        Some(out)
    }
}

fn basis_vector(x: usize) -> Column {
    Column::from([(x, Laurent::one())])
}

fn normalize(v: Column, ring: Ring) -> Column {
    v.into_iter().map(|(k, c)| (k, ring.normalize(&c))).filter(|(_, c)| !c.is_zero()).collect()
}

fn lin(terms: &[(Laurent, &Column)]) -> Column {
    let mut out = Column::new();
    for (s, v) in terms {
        for (k, c) in *v {
            *out.entry(*k).or_default() += &(s * c);
        }
    }
    out
}

fn generator_names(c: &Configuration) -> Vec<String> {
    (0..c.generator_count())
        .map(|x| {
            let parts: Vec<String> = (0..c.circles.len())
                .map(|i| {
                    let letter = if i < c.n_essential { 'v' } else { 'w' };
                    format!("{letter}{}", if x >> i & 1 == 1 { '-' } else { '+' })
                })
                .collect();
            if parts.is_empty() {
                "1".into()
            } else {
                parts.join("⊗")
            }
        })
        .collect()
}

fn k_power(c: &Configuration, sign: i64, name: &str) -> UqOperator {
    UqOperator {
        name: name.into(),
        basis: generator_names(c),
        columns: (0..c.generator_count())
            .map(|x| Some(Column::from([(x, Laurent::monomial(1, sign * adeg_of(x, c)))])))
            .collect(),
        adeg_shift: 0,
    }
}

/// K x = q^{adeg x} x.
pub fn k_operator(c: &Configuration) -> UqOperator {
    k_power(c, 1, "K")
}

pub fn k_inverse(c: &Configuration) -> UqOperator {
    k_power(c, -1, "K^-1")
}

/// Basis of V⊗V ⊕ W for the two-strand module, in generator-index order
/// (bit i set when factor i is `-`), followed by w+, w-.
pub const TWO_STRAND_BASIS: [&str; 6] = ["v+⊗v+", "v-⊗v+", "v+⊗v-", "v-⊗v-", "w+", "w-"];
const PP: usize = 0;
const MP: usize = 1;
const PM: usize = 2;
const MM: usize = 3;
const WP: usize = 4;

fn two_strand_adeg(x: usize) -> i64 {
    match x {
        PP => 2,
        MM => -2,
        _ => 0,
    }
}

fn two_strand_k(sign: i64) -> UqOperator {
    UqOperator {
        name: if sign > 0 { "K" } else { "K^-1" }.into(),
        basis: TWO_STRAND_BASIS.iter().map(|s| s.to_string()).collect(),
        columns: (0..6).map(|x| Some(Column::from([(x, Laurent::monomial(1, sign * two_strand_adeg(x)))]))).collect(),
        adeg_shift: 0,
    }
}

fn partial(name: &str, shift: i64, cols: &[(usize, &[(usize, i64, i64)])]) -> UqOperator {
    let mut columns = vec![None; 6];
    for (x, img) in cols {
        columns[*x] = Some(img.iter().map(|&(y, c, e)| (y, Laurent::monomial(c, e))).collect());
    }
    UqOperator { name: name.into(), basis: TWO_STRAND_BASIS.iter().map(|s| s.to_string()).collect(), columns, adeg_shift: shift }
}

/// E and F on V⊗V ⊕ W. E(v-⊗v-), E(w-), F(v+⊗v+), F(v-⊗v-), F(w-) are left unspecified.
pub fn ef_two_strand() -> (UqOperator, UqOperator) {
    let e = partial("E", 2, &[(WP, &[]), (PM, &[(PP, -1, 0)]), (MP, &[(PP, 1, 1)]), (PP, &[])]);
    let f = partial("F", -2, &[(WP, &[]), (PM, &[(MM, 1, 0)]), (MP, &[(MM, -1, 1)])]);
    (e, f)
}

/// One relation checked column by column.
#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub checked: Vec<String>,
    pub skipped: Vec<String>,
    pub failed: Vec<String>,
}

impl RelationCheck {
    pub fn passed(&self) -> bool {
        self.failed.is_empty() && !self.checked.is_empty()
    }
}

/// Compare `lhs(x)` with `rhs(x)` on every basis vector where both are determined.
fn check_relation(
    name: &str,
    basis: &[String],
    ring: Ring,
    lhs: impl Fn(&Column) -> Option<Column>,
    rhs: impl Fn(&Column) -> Option<Column>,
) -> RelationCheck {
    let mut rc = RelationCheck { relation: name.into(), checked: vec![], skipped: vec![], failed: vec![] };
    for (x, label) in basis.iter().enumerate() {
        let v = basis_vector(x);
        match (lhs(&v), rhs(&v)) {
            (Some(a), Some(b)) => {
                rc.checked.push(label.clone());
                if normalize(a, ring) != normalize(b, ring) {
                    rc.failed.push(label.clone());
                }
            }
            _ => rc.skipped.push(label.clone()),
        }
    }
    rc
}

#[derive(Clone, Debug, Serialize)]
pub struct UqReport {
    pub r: u32,
    pub relations: Vec<RelationCheck>,
    pub degree_violations: Vec<String>,
    pub negative_control: NegativeControl,
}

impl UqReport {
    pub fn passed(&self) -> bool {
        self.relations.iter().all(|c| c.passed()) && self.degree_violations.is_empty() && self.negative_control.reproduced()
    }
}

/// The two composites of E with the one-crossing saddle from W to V⊗V, counted
/// term by term before cancellation.
#[derive(Clone, Debug, Serialize)]
pub struct NegativeControl {
    /// Terms of d(E w+): E applied on the one-circle side first.
    pub e_then_saddle: Vec<i64>,
    /// Terms of E(d w+): the saddle first, then E on the two-circle side.
    pub saddle_then_e: Vec<i64>,
}

impl NegativeControl {
    /// One composite is empty while the other has two terms of opposite sign.
    pub fn reproduced(&self) -> bool {
        self.e_then_saddle.is_empty() && self.saddle_then_e.len() == 2 && self.saddle_then_e.iter().sum::<i64>() == 0
    }
}

/// Uses the differential of the one-crossing diagram whose 0-smoothing is W and 1-smoothing V⊗V.
fn negative_control(e: &UqOperator, r: u32) -> NegativeControl {
    let w = TangleWord::braid(2, r, &[(1, -1)]).expect("one-crossing word");
    let c = build_complex(&w, r, &WeightScheme::default()).expect("one-crossing complex");
    let edge = c.edge(0, 0).expect("single edge");
    let mut saddle_then_e = Vec::new();
    for (y, c) in edge.signed().column(0) {
        for ce in e.image(*y).expect("E specified on v+⊗v-, v-⊗v+").values() {
            let t = c * ce;
            saddle_then_e.push(t.as_monomial().map(|m| m.0).unwrap_or(0));
        }
    }
    let e_then_saddle = e.image(WP).expect("E(w+) specified").keys().map(|_| 1).collect();
    NegativeControl { e_then_saddle, saddle_then_e }
}

/// Adeg bookkeeping of the specified entries of an operator.
fn degree_violations(op: &UqOperator) -> Vec<String> {
    let mut out = Vec::new();
    for (x, col) in op.columns.iter().enumerate() {
        let Some(col) = col else { continue };
        for y in col.keys() {
            let in_w = |z: usize| z >= WP;
            if in_w(x) != in_w(*y) || two_strand_adeg(*y) - two_strand_adeg(x) != op.adeg_shift {
                out.push(format!("{}: {} -> {}", op.name, op.basis[x], op.basis[*y]));
            }
        }
    }
    out
}

/// The four defining relations on the columns where E and F are specified.
pub fn verify_relations(r: u32) -> UqReport {
    let (e, f) = ef_two_strand();
    verify_relations_for(&e, &f, r)
}

pub fn verify_relations_for(e: &UqOperator, f: &UqOperator, r: u32) -> UqReport {
    let ring = Ring::from_r(r);
    let (k, ki) = (two_strand_k(1), two_strand_k(-1));
    let basis = k.basis.clone();
    let q = |n: i64| Laurent::monomial(1, n);
    let relations = vec![
        check_relation("K K^-1 = 1", &basis, ring, |v| k.apply(&ki.apply(v)?), |v| Some(v.clone())),
        check_relation("K^-1 K = 1", &basis, ring, |v| ki.apply(&k.apply(v)?), |v| Some(v.clone())),
        check_relation("K E = q^2 E K", &basis, ring, |v| k.apply(&e.apply(v)?), |v| Some(lin(&[(q(2), &e.apply(&k.apply(v)?)?)]))),
        check_relation("K F = q^-2 F K", &basis, ring, |v| k.apply(&f.apply(v)?), |v| Some(lin(&[(q(-2), &f.apply(&k.apply(v)?)?)]))),
        check_relation(
            "K - K^-1 = (q - q^-1)(E F - F E)",
            &basis,
            ring,
            |v| Some(lin(&[(Laurent::one(), &k.apply(v)?), (Laurent::monomial(-1, 0), &ki.apply(v)?)])),
            |v| {
                let ef = e.apply(&f.apply(v)?)?;
                let fe = f.apply(&e.apply(v)?)?;
                let diff = lin(&[(Laurent::one(), &ef), (Laurent::monomial(-1, 0), &fe)]);
                Some(lin(&[(Laurent::from_terms([(1, 1), (-1, -1)]), &diff)]))
            },
        ),
    ];
    let mut degree = degree_violations(e);
    degree.extend(degree_violations(f));
    UqReport { r, relations, degree_violations: degree, negative_control: negative_control(e, r) }
}

/// K on a whole cube complex: one diagonal matrix over all generators.
pub fn k_on_complex(c: &CubeComplex, sign: i64) -> crate::matrix::LMatrix {
    let entries = c
        .vertices
        .iter()
        .flat_map(|v| (0..v.rank()).map(|x| c.ring.normalize(&Laurent::monomial(1, sign * adeg_of(x, &v.conf)))))
        .collect();
    crate::matrix::LMatrix::diagonal(entries)
}

#[derive(Clone, Debug, Serialize)]
pub struct KChainCheck {
    pub commutes: bool,
    pub invertible: bool,
    /// K(q x) = q K(x), checked on the columns of K.
    pub equivariant: bool,
}

impl KChainCheck {
    pub fn passed(&self) -> bool {
        self.commutes && self.invertible && self.equivariant
    }
}

/// K d = d K, K K^-1 = 1, and q-linearity on one complex.
pub fn check_k_chain(c: &CubeComplex) -> KChainCheck {
    let ring = c.ring;
    let (k, ki) = (k_on_complex(c, 1), k_on_complex(c, -1));
    let d = total_differential(c);
    let zero = |m: crate::matrix::LMatrix| m.map_entries(|x| ring.normalize(x)).is_zero();
    let commutes = zero(k.mul(&d).sub(&d.mul(&k)));
    let n = k.cols;
    let id = crate::matrix::LMatrix::identity(n);
    let invertible = zero(k.mul(&ki).sub(&id)) && zero(ki.mul(&k).sub(&id));
    let qm = crate::matrix::LMatrix::identity(n).scale(&Laurent::q());
    let equivariant = zero(k.mul(&qm).sub(&qm.mul(&k)));
    KChainCheck { commutes, invertible, equivariant }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{FlatSlice, FlatTangle};

    fn conf(k: usize, slices: Vec<FlatSlice>) -> Configuration {
        FlatTangle::new(k, slices).unwrap().configuration().unwrap()
    }

    fn diag(op: &UqOperator) -> Vec<Laurent> {
        op.columns.iter().enumerate().map(|(x, c)| c.as_ref().unwrap()[&x].clone()).collect()
    }

    #[test]
    fn k_is_trivial_on_w() {
        let c = conf(0, vec![FlatSlice::Cup(0), FlatSlice::Cap(0)]);
        assert_eq!(diag(&k_operator(&c)), vec![Laurent::one(), Laurent::one()]);
    }

    #[test]
    fn k_on_v_and_v_tensor_v() {
        let v = conf(1, vec![FlatSlice::Id]);
        assert_eq!(diag(&k_operator(&v)), vec![Laurent::q(), Laurent::monomial(1, -1)]);
        let vv = conf(2, vec![FlatSlice::Id]);
        let d = diag(&k_operator(&vv));
        assert_eq!(d[0], Laurent::monomial(1, 2));
        assert_eq!(d[1], Laurent::one());
        assert_eq!(d[2], Laurent::one());
        assert_eq!(d[3], Laurent::monomial(1, -2));
    }

    #[test]
    fn e_and_f_values() {
        let (e, f) = ef_two_strand();
        assert_eq!(e.image(PM).unwrap(), &Column::from([(PP, Laurent::monomial(-1, 0))]));
        assert_eq!(e.image(MP).unwrap(), &Column::from([(PP, Laurent::q())]));
        assert_eq!(f.image(MP).unwrap(), &Column::from([(MM, Laurent::monomial(-1, 1))]));
        assert!(e.image(MM).is_none() && f.image(PP).is_none());
    }

    #[test]
    fn relations_hold_on_specified_columns() {
        for r in [0, 1, 2, 3, 5] {
            let rep = verify_relations(r);
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn degree_preserving_f_breaks_kf() {
        let (e, mut f) = ef_two_strand();
        f.columns[PM] = Some(Column::from([(MP, Laurent::one())]));
        let rep = verify_relations_for(&e, &f, 0);
        let kf = rep.relations.iter().find(|c| c.relation.starts_with("K F")).unwrap();
        assert_eq!(kf.failed, vec!["v+⊗v-".to_string()]);
        assert!(!rep.degree_violations.is_empty());
    }

    #[test]
    fn negative_control_counts() {
        let nc = verify_relations(3).negative_control;
        assert!(nc.e_then_saddle.is_empty());
        assert_eq!(nc.saddle_then_e.len(), 2);
        assert!(nc.reproduced());
    }
}
