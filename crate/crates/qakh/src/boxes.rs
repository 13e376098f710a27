//! Exact box assignments for equivariant correspondences.
//!
//! Every element (q^l, x) of a vertex set owns a big box, a translate of the
//! unit cube along axis 0. Sub-boxes are described in normalized coordinates of
//! their big box, so the canonical map B_x -> B_{gx} is a translation.

use crate::burnside::{BurnsideFunctor, Correspondence, GSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

pub type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Product of closed rational intervals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxK {
    pub axes: Vec<(Q, Q)>,
}

impl BoxK {
    pub fn cube(k: usize, lo: Q, hi: Q) -> Self {
        Self { axes: vec![(lo, hi); k] }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn has_interior(&self) -> bool {
        self.axes.iter().all(|(a, b)| a < b)
    }

    pub fn contains(&self, other: &BoxK) -> bool {
        self.axes.iter().zip(&other.axes).all(|((a, b), (c, d))| a <= c && d <= b)
    }

    /// Interiors are disjoint.
    pub fn disjoint(&self, other: &BoxK) -> bool {
        self.axes.iter().zip(&other.axes).any(|((a, b), (c, d))| b <= c || d <= a)
    }

    /// Coordinates of `self` relative to `big`, as a sub-box of the unit cube.
    pub fn normalize_in(&self, big: &BoxK) -> BoxK {
        let axes = self
            .axes
            .iter()
            .zip(&big.axes)
            .map(|((a, b), (lo, hi))| {
                let w = hi - lo;
                ((a - lo) / &w, (b - lo) / &w)
            })
            .collect();
        BoxK { axes }
    }

    /// Image of a normalized box under the affine identification of the unit cube with `big`.
    pub fn embed_in(&self, big: &BoxK) -> BoxK {
        let axes = self
            .axes
            .iter()
            .zip(&big.axes)
            .map(|((a, b), (lo, hi))| {
                let w = hi - lo;
                (lo + a * &w, lo + b * &w)
            })
            .collect();
        BoxK { axes }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let frac = |x: &Q| serde_json::json!([x.numer().to_string(), x.denom().to_string()]);
        serde_json::Value::Array(self.axes.iter().map(|(a, b)| serde_json::json!([frac(a), frac(b)])).collect())
    }
}

/// Big box of the element (q^l, x) of a G-set with |G| = r.
pub fn big_box(k: usize, r: u32, (l, x): (u32, usize)) -> BoxK {
    let mut b = BoxK::cube(k, Q::zero(), Q::one());
    let slot = BigInt::from(2 * (x as u64 * r as u64 + l as u64));
    b.axes[0] = (Q::from_integer(slot.clone()), Q::from_integer(slot + 1));
    b
}

/// One sub-box per member of a (possibly composite) correspondence.
#[derive(Clone, Debug)]
pub struct Member {
    /// Orbit representative: element indices along the chain, first step first.
    pub chain: Vec<usize>,
    pub l: u32,
    pub source: (u32, usize),
    pub target: (u32, usize),
    pub bx: BoxK,
}

#[derive(Clone, Debug)]
pub struct Assignment {
    pub k: usize,
    pub r: u32,
    pub members: Vec<Member>,
}

/// Equal slabs along axis 0 for each fiber over an orbit, repeated on every element of the orbit.
pub fn assign_boxes(corr: &Correspondence, source: &GSet, k: usize) -> Assignment {
    let r = source.r;
    let mut fibers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in corr.elements.iter().enumerate() {
        fibers.entry(e.x).or_default().push(i);
    }
    let mut members = Vec::new();
    for (x, idx) in fibers {
        let m = idx.len() as i64;
        for (j, &i) in idx.iter().enumerate() {
            let mut norm = BoxK::cube(k, q(1, 4), q(3, 4));
            norm.axes[0] = (q(4 * j as i64 + 1, 4 * m), q(4 * j as i64 + 3, 4 * m));
            let e = corr.elements[i];
            for l in 0..r {
                members.push(Member {
                    chain: vec![i],
                    l,
                    source: (l, x),
                    target: ((l + e.shift) % r, e.y),
                    bx: norm.embed_in(&big_box(k, r, (l, x))),
                });
            }
        }
    }
    Assignment { k, r, members }
}

/// Φ(e, A)^{-1}(e'): the composite box of (b, a) is the preimage of B_b inside B_a.
pub fn pullback(first: &Assignment, second: &Assignment) -> Assignment {
    let (k, r) = (first.k, first.r);
    let mut by_source: HashMap<(u32, usize), Vec<&Member>> = HashMap::new();
    for m in &second.members {
        by_source.entry(m.source).or_default().push(m);
    }
    let mut members = Vec::new();
    for a in &first.members {
        let target_big = big_box(k, r, a.target);
        for b in by_source.get(&a.target).map(|v| v.as_slice()).unwrap_or(&[]) {
            let mut chain = a.chain.clone();
            chain.extend(&b.chain);
            members.push(Member {
                chain,
                l: a.l,
                source: a.source,
                target: b.target,
                bx: b.bx.normalize_in(&target_big).embed_in(&a.bx),
            });
        }
    }
    Assignment { k, r, members }
}

impl Assignment {
    /// Violations of containment, nonempty interior, disjointness and orbit uniformity.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut by_source: HashMap<(u32, usize), Vec<&Member>> = HashMap::new();
        for m in &self.members {
            by_source.entry(m.source).or_default().push(m);
            let big = big_box(self.k, self.r, m.source);
            if !m.bx.has_interior() || !big.contains(&m.bx) {
                out.push(format!("box of {:?} escapes its big box", m.chain));
            }
        }
        for (src, ms) in &by_source {
            for i in 0..ms.len() {
                for j in i + 1..ms.len() {
                    if !ms[i].bx.disjoint(&ms[j].bx) {
                        out.push(format!("boxes {:?} and {:?} overlap in {src:?}", ms[i].chain, ms[j].chain));
                    }
                }
            }
        }
        let mut orbit: HashMap<&[usize], BoxK> = HashMap::new();
        for m in &self.members {
            let norm = m.bx.normalize_in(&big_box(self.k, self.r, m.source));
            match orbit.get(m.chain.as_slice()) {
                None => {
                    orbit.insert(&m.chain, norm);
                }
                Some(b) if *b != norm => out.push(format!("orbit of {:?} is not uniform", m.chain)),
                _ => {}
            }
        }
        out
    }

    /// Assignment for the orbit correspondence: one box per orbit, in normalized position.
    pub fn quotient(&self) -> Assignment {
        let members = self
            .members
            .iter()
            .filter(|m| m.l == 0)
            .map(|m| Member {
                chain: m.chain.clone(),
                l: 0,
                source: (0, m.source.1),
                target: (0, m.target.1),
                bx: m.bx.normalize_in(&big_box(self.k, self.r, m.source)).embed_in(&big_box(self.k, 1, (0, m.source.1))),
            })
            .collect();
        Assignment { k: self.k, r: 1, members }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.members
                .iter()
                .map(|m| {
                    serde_json::json!({
                        "chain": m.chain, "l": m.l, "source": [m.source.0, m.source.1],
                        "target": [m.target.0, m.target.1], "box": m.bx.to_json(),
                    })
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BoxAudit {
    pub correspondences: usize,
    pub pullbacks: usize,
    pub quotients: usize,
    pub failures: Vec<String>,
}

impl BoxAudit {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Assignments on every edge, pullbacks along every path of length 2 and 3,
/// and quotient counts |A| / r per orbit box.
pub fn audit_functor(f: &BurnsideFunctor, k: usize) -> BoxAudit {
    let n = f.n();
    let assignments: Vec<Assignment> =
        f.edges.par_iter().map(|e| assign_boxes(e, &f.vertices[e.from], k)).collect();
    let mut audit = BoxAudit { correspondences: f.edges.len(), ..Default::default() };
    for (e, a) in f.edges.iter().zip(&assignments) {
        for v in a.violations() {
            audit.failures.push(format!("edge {} -> {}: {v}", e.from, e.to));
        }
        let qa = a.quotient();
        audit.quotients += 1;
        if qa.members.len() * f.r as usize != a.members.len() || qa.members.len() != e.elements.len() {
            audit.failures.push(format!("edge {} -> {}: quotient box count", e.from, e.to));
        }
        for v in qa.violations() {
            audit.failures.push(format!("edge {} -> {} quotient: {v}", e.from, e.to));
        }
    }
    // paths u -> v -> w (-> z) through the cube
    let mut paths: Vec<Vec<usize>> = Vec::new();
    for u in 0..1usize << n {
        for c1 in (0..n).filter(|&c| u >> c & 1 == 0) {
            let e1 = f.edge_index(u, c1);
            let v = u | 1 << c1;
            for c2 in (0..n).filter(|&c| v >> c & 1 == 0) {
                let e2 = f.edge_index(v, c2);
                paths.push(vec![e1, e2]);
                let w = v | 1 << c2;
                for c3 in (0..n).filter(|&c| w >> c & 1 == 0) {
                    paths.push(vec![e1, e2, f.edge_index(w, c3)]);
                }
            }
        }
    }
    let failures: Vec<String> = paths
        .par_iter()
        .flat_map_iter(|p| {
            let mut acc = assignments[p[0]].clone();
            for &e in &p[1..] {
                acc = pullback(&acc, &assignments[e]);
            }
            acc.violations().into_iter().map(move |v| format!("path {p:?}: {v}"))
        })
        .collect();
    audit.pullbacks = paths.len();
    audit.failures.extend(failures);
    audit
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CellCensus {
    /// Cell dimension k + |u| -> (cells, orbits).
    pub cells: BTreeMap<usize, (usize, usize)>,
    /// Same, read off the totalized complex.
    pub tot_ranks: BTreeMap<usize, (usize, usize)>,
    pub incidence_checked: usize,
    pub failures: Vec<String>,
}

impl CellCensus {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.cells == self.tot_ranks
    }
}

/// Cells of the realization against generators of Tot, and sub-box counts against differential entries.
pub fn cell_census(f: &BurnsideFunctor, k: usize) -> CellCensus {
    let mut census = CellCensus::default();
    for (u, v) in f.vertices.iter().enumerate() {
        let d = k + (u as u64).count_ones() as usize;
        let slot = census.cells.entry(d).or_default();
        slot.0 += v.elements().count();
        slot.1 += v.gens;
    }
    let tot = f.totalize();
    for v in &tot.vertices {
        let d = k + v.weight();
        let slot = census.tot_ranks.entry(d).or_default();
        slot.0 += v.rank() * f.r as usize;
        slot.1 += v.rank();
    }
    for (e, te) in f.edges.iter().zip(&tot.edges) {
        let a = assign_boxes(e, &f.vertices[e.from], k);
        let mut counts: HashMap<(usize, u32, usize), i64> = HashMap::new();
        for m in a.members.iter().filter(|m| m.source.0 == 0) {
            *counts.entry((m.source.1, m.target.0, m.target.1)).or_default() += 1;
        }
        for x in 0..f.vertices[e.from].gens {
            for y in 0..f.vertices[e.to].gens {
                let entry = te.matrix.get(y, x);
                for l in 0..f.r {
                    let want = entry.terms().filter(|t| t.0 == l as i64).map(|t| t.1.abs()).sum::<i64>();
                    let have = counts.get(&(x, l, y)).copied().unwrap_or(0);
                    census.incidence_checked += 1;
                    if want != have {
                        census.failures.push(format!("edge {} -> {}: incidence ({x}, q^{l} {y}) is {have}, entry has {want}", e.from, e.to));
                    }
                }
            }
        }
    }
    census
}
