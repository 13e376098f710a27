//! The cube of resolutions assembled into a trigraded chain complex.

use crate::cobordism_calc::{classical_saddle, eval_saddle, saddle_type, SaddleType, WeightScheme};
use crate::diagram::{site_at, Configuration, GradingData, Slice, TangleWord};
use crate::error::Result;
use crate::matrix::LMatrix;
use crate::scalar::Laurent;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Scalar ring of a complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Ring {
    /// Z[q, q^-1], no reduction.
    Laurent,
    /// k_r = Z[q]/(q^r - 1).
    Cyclotomic(u32),
    /// Z, entries stored as constants.
    Integer,
}

impl Ring {
    pub fn from_r(r: u32) -> Self {
        if r == 0 {
            Ring::Laurent
        } else {
            Ring::Cyclotomic(r)
        }
    }

    pub fn normalize(&self, x: &Laurent) -> Laurent {
        match *self {
            Ring::Laurent => x.clone(),
            Ring::Cyclotomic(r) => x.reduce(r),
            Ring::Integer => Laurent::monomial(x.eval_one(), 0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub u: Vec<bool>,
    pub conf: Configuration,
}

impl Vertex {
    pub fn weight(&self) -> usize {
        self.u.iter().filter(|&&b| b).count()
    }

    pub fn rank(&self) -> usize {
        self.conf.generator_count()
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub crossing: usize,
    /// s_{v,u} = number of 1s of u before the changed coordinate, mod 2.
    pub sign: bool,
    pub kind: SaddleType,
    /// Unsigned edge map.
    pub matrix: LMatrix,
}

impl Edge {
    pub fn signed(&self) -> LMatrix {
        if self.sign {
            self.matrix.neg()
        } else {
            self.matrix.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct CubeComplex {
    pub word: TangleWord,
    pub ring: Ring,
    pub grading: GradingData,
    /// Indexed by u read as a binary number, crossing c at bit c.
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    edge_at: BTreeMap<(usize, usize), usize>,
}

/// (h, j, k) of generator `g` at vertex `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Tridegree {
    pub h: i64,
    pub j: i64,
    pub k: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    pub vertex: usize,
    pub crossings: (usize, usize),
}

pub fn vertex_bits(u: &[bool]) -> usize {
    u.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum()
}

pub fn bits_vertex(idx: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| idx >> i & 1 == 1).collect()
}

/// (slice, 0-based left position) of each crossing.
pub fn crossing_positions(word: &TangleWord) -> Vec<(usize, usize)> {
    word.slices
        .iter()
        .enumerate()
        .filter_map(|(l, s)| match *s {
            Slice::Crossing { i, .. } => Some((l, i - 1)),
            _ => None,
        })
        .collect()
}

fn vertices_of(word: &TangleWord) -> Result<Vec<Vertex>> {
    let n = word.crossing_count();
    (0..1usize << n)
        .into_par_iter()
        .map(|idx| {
            let u = bits_vertex(idx, n);
            let conf = word.resolve(&u).tangle.configuration()?;
            Ok(Vertex { u, conf })
        })
        .collect()
}

fn assemble(word: &TangleWord, ring: Ring, vertices: Vec<Vertex>, edges: Vec<Edge>) -> CubeComplex {
    let edge_at = edges.iter().enumerate().map(|(i, e)| ((e.from, e.crossing), i)).collect();
    CubeComplex { word: word.clone(), ring, grading: word.grading(), vertices, edges, edge_at }
}

fn edge_list(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for from in 0..1usize << n {
        for c in 0..n {
            if from >> c & 1 == 0 {
                out.push((from, c));
            }
        }
    }
    out
}

fn edge_sign(from: usize, c: usize) -> bool {
    (from & ((1 << c) - 1)).count_ones() % 2 == 1
}

/// Quantum annular complex over k_r (r >= 1) or Z[q, q^-1] (r = 0).
pub fn build_complex(word: &TangleWord, r: u32, scheme: &WeightScheme) -> Result<CubeComplex> {
    build_complex_corrupted(word, r, scheme, None)
}

/// As [`build_complex`], with the edge of index `corrupt` multiplied by q (negative control).
pub fn build_complex_corrupted(
    word: &TangleWord,
    r: u32,
    scheme: &WeightScheme,
    corrupt: Option<usize>,
) -> Result<CubeComplex> {
    let ring = Ring::from_r(r);
    let n = word.crossing_count();
    let vertices = vertices_of(word)?;
    let pos = crossing_positions(word);
    let edges: Result<Vec<Edge>> = edge_list(n)
        .into_par_iter()
        .enumerate()
        .map(|(ei, (from, c))| {
            let cu = &vertices[from].conf;
            let site = site_at(cu, c, pos[c].0, pos[c].1);
            let mut m = eval_saddle(cu, &site, scheme)?.matrix;
            if corrupt == Some(ei) {
                m = m.scale(&Laurent::q());
            }
            Ok(Edge {
                from,
                to: from | 1 << c,
                crossing: c,
                sign: edge_sign(from, c),
                kind: saddle_type(cu, &site)?,
                matrix: m.map_entries(|x| ring.normalize(x)),
            })
        })
        .collect();
    Ok(assemble(word, ring, vertices, edges?))
}

/// Classical annular complex over Z, built from the independent classical saddle formulas.
pub fn classical_complex(word: &TangleWord) -> Result<CubeComplex> {
    let n = word.crossing_count();
    let vertices = vertices_of(word)?;
    let pos = crossing_positions(word);
    let edges: Result<Vec<Edge>> = edge_list(n)
        .into_par_iter()
        .map(|(from, c)| {
            let cu = &vertices[from].conf;
            let site = site_at(cu, c, pos[c].0, pos[c].1);
            let cols = classical_saddle(cu, &site)?;
            let rows = vertices[from | 1 << c].rank();
            let m = LMatrix::from_columns(
                rows,
                cols.into_iter()
                    .map(|col| {
                        let mut acc: BTreeMap<usize, Laurent> = BTreeMap::new();
                        for (row, v) in col {
                            acc.entry(row).or_default().add_term(v, 0);
                        }
                        acc
                    })
                    .collect(),
            );
            Ok(Edge {
                from,
                to: from | 1 << c,
                crossing: c,
                sign: edge_sign(from, c),
                kind: saddle_type(cu, &site)?,
                matrix: m,
            })
        })
        .collect();
    Ok(assemble(word, Ring::Integer, vertices, edges?))
}

impl CubeComplex {
    pub fn from_parts(word: &TangleWord, ring: Ring, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Self {
        assemble(word, ring, vertices, edges)
    }

    pub fn n(&self) -> usize {
        self.word.crossing_count()
    }

    pub fn edge(&self, from: usize, crossing: usize) -> Option<&Edge> {
        self.edge_at.get(&(from, crossing)).map(|&i| &self.edges[i])
    }

    pub fn tridegree(&self, vertex: usize, gen: usize) -> Tridegree {
        let v = &self.vertices[vertex];
        let w = v.weight();
        let label = crate::cobordism_calc::GeneratorLabel::from_index(gen, v.conf.n_essential, v.conf.n_trivial());
        Tridegree {
            h: self.grading.homological(w),
            j: label.qdeg() + self.grading.quantum_shift(w),
            k: label.adeg(),
        }
    }

    /// Same complex with every entry mapped into another ring.
    pub fn change_ring(&self, ring: Ring) -> CubeComplex {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { matrix: e.matrix.map_entries(|x| ring.normalize(x)), ..e.clone() })
            .collect();
        assemble(&self.word, ring, self.vertices.clone(), edges)
    }

    /// Substitute q = 1.
    pub fn specialize_q1(&self) -> CubeComplex {
        self.change_ring(Ring::Integer)
    }

    /// 2-faces as (vertex, c1 < c2) with both coordinates 0 at the vertex.
    pub fn faces(&self) -> Vec<Face> {
        let n = self.n();
        let mut out = Vec::new();
        for v in 0..self.vertices.len() {
            for c1 in 0..n {
                for c2 in c1 + 1..n {
                    if v >> c1 & 1 == 0 && v >> c2 & 1 == 0 {
                        out.push(Face { vertex: v, crossings: (c1, c2) });
                    }
                }
            }
        }
        out
    }

    /// The two composites around a face: (via c1 first, via c2 first), signed or not.
    pub fn face_composites(&self, f: &Face, signed: bool) -> (LMatrix, LMatrix) {
        let (c1, c2) = f.crossings;
        let u = f.vertex;
        let get = |from: usize, c: usize| {
            let e = self.edge(from, c).expect("edge");
            if signed {
                e.signed()
            } else {
                e.matrix.clone()
            }
        };
        let a = get(u | 1 << c1, c2).mul(&get(u, c1));
        let b = get(u | 1 << c2, c1).mul(&get(u, c2));
        let norm = |m: LMatrix| m.map_entries(|x| self.ring.normalize(x));
        (norm(a), norm(b))
    }

    /// Faces whose signed composites do not cancel.
    pub fn verify_d_squared(&self) -> Vec<Face> {
        self.faces()
            .into_par_iter()
            .filter(|f| {
                let (a, b) = self.face_composites(f, true);
                !a.add(&b).map_entries(|x| self.ring.normalize(x)).is_zero()
            })
            .collect()
    }

    /// Faces whose unsigned composites differ.
    pub fn verify_commuting(&self) -> Vec<Face> {
        self.faces()
            .into_par_iter()
            .filter(|f| {
                let (a, b) = self.face_composites(f, false);
                !a.sub(&b).map_entries(|x| self.ring.normalize(x)).is_zero()
            })
            .collect()
    }

    /// Entrywise comparison of edge maps (signs included) after normalizing both into `ring`.
    pub fn same_differential(&self, other: &CubeComplex, ring: Ring) -> bool {
        self.edges.len() == other.edges.len()
            && self.edges.iter().zip(&other.edges).all(|(a, b)| {
                a.from == b.from
                    && a.crossing == b.crossing
                    && a.sign == b.sign
                    && a.matrix.map_entries(|x| ring.normalize(x)) == b.matrix.map_entries(|x| ring.normalize(x))
            })
    }

    /// Essential merge and split edges whose two nonzero coefficients are not in ratio q.
    ///
    /// The two essential circles involved differ in two generator bits i < j; the
    /// term with circle i labelled `+` must be q times the term with it labelled `-`.
    pub fn saddle_ratio_violations(&self) -> Vec<(usize, usize)> {
        let ring = self.ring;
        let ok_pair = |a: (usize, &Laurent), b: (usize, &Laurent)| {
            let diff = a.0 ^ b.0;
            if diff.count_ones() != 2 {
                return false;
            }
            let i = diff.trailing_zeros();
            let (plus, minus) = if a.0 >> i & 1 == 0 { (a.1, b.1) } else { (b.1, a.1) };
            ring.normalize(plus) == ring.normalize(&(minus * &Laurent::q()))
        };
        self.edges
            .iter()
            .filter(|e| match e.kind {
                SaddleType::SplitIntoEssentials => (0..e.matrix.cols).any(|x| {
                    let col = e.matrix.column(x);
                    match col {
                        [] => false,
                        [a, b] => !ok_pair((a.0, &a.1), (b.0, &b.1)),
                        _ => true,
                    }
                }),
                SaddleType::MergeEssentials => {
                    let mut rows: BTreeMap<usize, Vec<(usize, Laurent)>> = BTreeMap::new();
                    for (i, j, v) in e.matrix.entries() {
                        rows.entry(i).or_default().push((j, v.clone()));
                    }
                    rows.values().any(|r| match r.as_slice() {
                        [a, b] => !ok_pair((a.0, &a.1), (b.0, &b.1)),
                        _ => true,
                    })
                }
                _ => false,
            })
            .map(|e| (e.from, e.crossing))
            .collect()
    }

    /// Generators grouped by homological degree: (vertex, generator) in a fixed order.
    pub fn chain_groups(&self) -> BTreeMap<i64, Vec<(usize, usize)>> {
        let mut out: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new();
        for (vi, v) in self.vertices.iter().enumerate() {
            let h = self.grading.homological(v.weight());
            for g in 0..v.rank() {
                out.entry(h).or_default().push((vi, g));
            }
        }
        out
    }
}
