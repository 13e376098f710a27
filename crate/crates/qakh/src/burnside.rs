//! The Z/r-equivariant Burnside functor of an annular diagram.
//!
//! Vertex sets are G × Γ(u) with G = Z/r acting on the first factor. Every
//! correspondence is stored by orbit representatives: an [`Element`] stands for
//! the orbit of ((l, x), (l + shift, y)). Two-step chains are pairs of element
//! indices and 2-morphisms are bijections between such pairs.

use crate::cobordism_calc::{adeg_of, SaddleType, WeightScheme};
use crate::complex::{bits_vertex, build_complex, classical_complex, crossing_positions, CubeComplex, Edge, Ring, Vertex};
use crate::diagram::{site_at, Configuration, TangleWord};
use crate::error::{Error, Result};
use crate::ladybug::{ladybug_pairs, Side};
use crate::matrix::LMatrix;
use crate::scalar::Laurent;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// How faces with two-element composite fibers are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LadybugPolicy {
    /// r > 2: faces whose fibers are separated by q-powers need no stored matching.
    Forced,
    /// r = 2: left-pair matching on every ladybug face.
    LeftPair,
    /// r = 1: the classical functor with the left-pair matching.
    Classical,
}

impl LadybugPolicy {
    pub fn for_r(r: u32) -> Self {
        match r {
            1 => LadybugPolicy::Classical,
            2 => LadybugPolicy::LeftPair,
            _ => LadybugPolicy::Forced,
        }
    }
}

/// G × Γ(u) for G = Z/r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GSet {
    pub r: u32,
    pub gens: usize,
}

impl GSet {
    pub fn len(&self) -> usize {
        self.r as usize * self.gens
    }

    pub fn is_empty(&self) -> bool {
        self.gens == 0
    }

    /// Action of the generator q of G.
    pub fn act(&self, (l, x): (u32, usize)) -> (u32, usize) {
        ((l + 1) % self.r, x)
    }

    pub fn elements(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        (0..self.gens).flat_map(move |x| (0..self.r).map(move |l| (l, x)))
    }
}

/// Orbit of ((q^l, x), (q^{l+shift}, y)) in F(u) × F(v).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Element {
    pub x: usize,
    pub y: usize,
    pub shift: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct Correspondence {
    pub from: usize,
    pub to: usize,
    pub crossing: usize,
    /// Sign s_{v,u} of the totalized differential.
    pub sign: bool,
    #[serde(skip)]
    pub kind: Option<SaddleType>,
    pub elements: Vec<Element>,
}

impl Correspondence {
    /// All members ((l, x), (l', y)) of the correspondence.
    pub fn members(&self, r: u32) -> Vec<((u32, usize), (u32, usize))> {
        self.elements
            .iter()
            .flat_map(|e| (0..r).map(move |l| ((l, e.x), ((l + e.shift) % r, e.y))))
            .collect()
    }
}

/// Indices of the two elements of a 2-step chain.
pub type Chain = (usize, usize);

/// (vertex, c1, c2) with c1 < c2 both unset at the vertex.
pub type FaceKey = (usize, usize, usize);

/// Composite fibers of a face keyed by (source gen, target gen, total shift):
/// chains through c1 first, chains through c2 first.
type Fibers = BTreeMap<(usize, usize, u32), (Vec<Chain>, Vec<Chain>)>;

#[derive(Clone, Debug)]
pub struct BurnsideFunctor {
    pub word: TangleWord,
    pub r: u32,
    pub policy: LadybugPolicy,
    pub vertices: Vec<GSet>,
    pub edges: Vec<Correspondence>,
    /// Stored 2-morphisms, only for chains in fibers with two or more elements.
    pub matchings: BTreeMap<FaceKey, Vec<(Chain, Chain)>>,
    /// Faces built with the right-pair matching instead of the left pair.
    pub flipped: BTreeSet<FaceKey>,
    confs: Vec<Configuration>,
    edge_at: BTreeMap<(usize, usize), usize>,
}

/// Faces of the n-cube.
pub fn cube_faces(n: usize) -> Vec<FaceKey> {
    let mut out = Vec::new();
    for v in 0..1usize << n {
        for c1 in 0..n {
            for c2 in c1 + 1..n {
                if v >> c1 & 1 == 0 && v >> c2 & 1 == 0 {
                    out.push((v, c1, c2));
                }
            }
        }
    }
    out
}

fn face_name(f: FaceKey) -> String {
    format!("face at vertex {} in crossings ({}, {})", f.0, f.1, f.2)
}

/// Quantum functor for r >= 2, classical functor for r = 1.
pub fn build_functor(word: &TangleWord, r: u32, scheme: &WeightScheme) -> Result<BurnsideFunctor> {
    build_functor_with(word, r, scheme, &BTreeSet::new())
}

/// As [`build_functor`], using the right-pair matching on the listed faces (negative control).
pub fn build_functor_with(
    word: &TangleWord,
    r: u32,
    scheme: &WeightScheme,
    flipped: &BTreeSet<FaceKey>,
) -> Result<BurnsideFunctor> {
    if r == 0 {
        return Err(Error::Domain("Burnside functor needs r >= 1".into()));
    }
    let cx = if r == 1 { classical_complex(word)? } else { build_complex(word, r, scheme)? };
    let mut f = BurnsideFunctor::from_complex(&cx, r)?;
    f.flipped = flipped.clone();
    let faces = cube_faces(word.crossing_count());
    let stored: Result<Vec<(FaceKey, Vec<(Chain, Chain)>)>> = faces
        .par_iter()
        .map(|&face| {
            let side = if flipped.contains(&face) { Side::Right } else { Side::Left };
            let mut pairs = Vec::new();
            for (p1, p2) in f.fibers(face).into_values() {
                if p1.len() != p2.len() {
                    return Err(Error::Mismatch(format!("{}: composite fibers differ in size", face_name(face))));
                }
                if p1.len() >= 2 {
                    pairs.extend(f.ladybug_match(face, &p1, &p2, side)?);
                }
            }
            Ok((face, pairs))
        })
        .collect();
    f.matchings = stored?.into_iter().filter(|(_, p)| !p.is_empty()).collect();
    if f.policy == LadybugPolicy::Forced {
        if let Some((face, _)) = f.forced_vs_left()?.into_iter().find(|(_, agree)| !agree) {
            return Err(Error::Mismatch(format!("{}: forced bijection differs from the left pair", face_name(face))));
        }
    }
    Ok(f)
}

/// The classical annular Burnside functor F_1.
pub fn classical_functor(word: &TangleWord) -> Result<BurnsideFunctor> {
    build_functor(word, 1, &WeightScheme::default())
}

impl BurnsideFunctor {
    /// Vertices and correspondences read off a complex whose entries are sums of
    /// monomials with nonnegative coefficients. No 2-morphisms are stored.
    pub fn from_complex(cx: &CubeComplex, r: u32) -> Result<Self> {
        let vertices = cx.vertices.iter().map(|v| GSet { r, gens: v.rank() }).collect();
        let mut edges = Vec::with_capacity(cx.edges.len());
        for e in &cx.edges {
            let mut elements = Vec::new();
            for (y, x, v) in e.matrix.entries() {
                for (exp, coef) in v.reduce(r).terms() {
                    if coef < 0 {
                        return Err(Error::Mismatch(format!(
                            "edge {} -> {}: entry {v} is not a positive sum of q-powers",
                            e.from, e.to
                        )));
                    }
                    let shift = exp.rem_euclid(r as i64) as u32;
                    elements.extend(std::iter::repeat_n(Element { x, y, shift }, coef as usize));
                }
            }
            elements.sort();
            edges.push(Correspondence { from: e.from, to: e.to, crossing: e.crossing, sign: e.sign, kind: Some(e.kind), elements });
        }
        let edge_at = edges.iter().enumerate().map(|(i, e)| ((e.from, e.crossing), i)).collect();
        Ok(Self {
            word: cx.word.clone(),
            r,
            policy: LadybugPolicy::for_r(r),
            vertices,
            edges,
            matchings: BTreeMap::new(),
            flipped: BTreeSet::new(),
            confs: cx.vertices.iter().map(|v| v.conf.clone()).collect(),
            edge_at,
        })
    }

    pub fn n(&self) -> usize {
        self.word.crossing_count()
    }

    pub fn configuration(&self, vertex: usize) -> &Configuration {
        &self.confs[vertex]
    }

    pub fn edge_index(&self, from: usize, crossing: usize) -> usize {
        self.edge_at[&(from, crossing)]
    }

    pub fn edge(&self, from: usize, crossing: usize) -> &Correspondence {
        &self.edges[self.edge_index(from, crossing)]
    }

    pub fn faces(&self) -> Vec<FaceKey> {
        cube_faces(self.n())
    }

    /// Chains from `u` through `first` then `second`, with their fiber keys.
    fn chains(&self, u: usize, first: usize, second: usize) -> Vec<((usize, usize, u32), Chain)> {
        let ea = self.edge(u, first);
        let eb = self.edge(u | 1 << first, second);
        let mut by_x: HashMap<usize, Vec<usize>> = HashMap::new();
        for (ib, b) in eb.elements.iter().enumerate() {
            by_x.entry(b.x).or_default().push(ib);
        }
        let mut out = Vec::new();
        for (ia, a) in ea.elements.iter().enumerate() {
            for &ib in by_x.get(&a.y).map(|v| v.as_slice()).unwrap_or(&[]) {
                let b = &eb.elements[ib];
                out.push(((a.x, b.y, (a.shift + b.shift) % self.r), (ia, ib)));
            }
        }
        out
    }

    fn fibers(&self, (u, c1, c2): FaceKey) -> Fibers {
        let mut out: Fibers = BTreeMap::new();
        for (k, ch) in self.chains(u, c1, c2) {
            out.entry(k).or_default().0.push(ch);
        }
        for (k, ch) in self.chains(u, c2, c1) {
            out.entry(k).or_default().1.push(ch);
        }
        out
    }

    /// Pairs chains of one fiber by the ladybug matching on `side`.
    fn ladybug_match(&self, face: FaceKey, p1: &[Chain], p2: &[Chain], side: Side) -> Result<Vec<(Chain, Chain)>> {
        let (u, c1, c2) = face;
        let (v1, v2) = (u | 1 << c1, u | 1 << c2);
        let pos = crossing_positions(&self.word);
        let s1 = site_at(&self.confs[u], c1, pos[c1].0, pos[c1].1);
        let s2 = site_at(&self.confs[u], c2, pos[c2].0, pos[c2].1);
        let circles = ladybug_pairs(&self.confs[u], &self.confs[v1], &self.confs[v2], &s1, &s2, side)
            .map_err(|e| Error::Ambiguity(format!("{}: {e}", face_name(face))))?;
        let e1 = self.edge(u, c1);
        let e2 = self.edge(u, c2);
        let mut out = Vec::with_capacity(p1.len());
        let mut used = BTreeSet::new();
        for &ch in p1 {
            let y = e1.elements[ch.0].y;
            let partners: Vec<Chain> = p2
                .iter()
                .copied()
                .filter(|ch2| {
                    let y2 = e2.elements[ch2.0].y;
                    circles.iter().all(|&(a, b)| (y >> a & 1) == (y2 >> b & 1))
                })
                .collect();
            if partners.len() != 1 || !used.insert(partners[0]) {
                return Err(Error::Ambiguity(format!("{}: ladybug matching is not a bijection", face_name(face))));
            }
            out.push((ch, partners[0]));
        }
        Ok(out)
    }

    /// The 2-morphism of a face as a map from chains through c1 first to chains through c2 first.
    pub fn face_map(&self, face: FaceKey) -> Result<HashMap<Chain, Chain>> {
        let stored: HashMap<Chain, Chain> =
            self.matchings.get(&face).map(|v| v.iter().copied().collect()).unwrap_or_default();
        let mut out = HashMap::new();
        for (p1, p2) in self.fibers(face).into_values() {
            if p1.len() != p2.len() {
                return Err(Error::Mismatch(format!("{}: composite fibers differ in size", face_name(face))));
            }
            if p1.len() == 1 {
                out.insert(p1[0], p2[0]);
                continue;
            }
            for ch in p1 {
                let img = stored
                    .get(&ch)
                    .ok_or_else(|| Error::Ambiguity(format!("{}: no matching stored for chain {ch:?}", face_name(face))))?;
                out.insert(ch, *img);
            }
        }
        Ok(out)
    }

    /// For faces whose fibers only separate through q-powers: does the forced
    /// bijection agree with the left-pair matching?
    pub fn forced_vs_left(&self) -> Result<Vec<(FaceKey, bool)>> {
        let mut out = Vec::new();
        for face in self.faces() {
            let fibers = self.fibers(face);
            let mut coarse: BTreeMap<(usize, usize), (Vec<Chain>, Vec<Chain>, bool)> = BTreeMap::new();
            for ((x, z, _), (p1, p2)) in &fibers {
                let slot = coarse.entry((*x, *z)).or_default();
                slot.0.extend(p1);
                slot.1.extend(p2);
                slot.2 |= p1.len() > 1;
            }
            let candidates: Vec<_> = coarse.into_values().filter(|(p1, _, fine)| p1.len() == 2 && !fine).collect();
            if candidates.is_empty() {
                continue;
            }
            let map = self.face_map(face)?;
            let mut agree = true;
            for (p1, p2, _) in candidates {
                let left = self.ladybug_match(face, &p1, &p2, Side::Left)?;
                agree &= left.iter().all(|(a, b)| map.get(a) == Some(b));
            }
            out.push((face, agree));
        }
        Ok(out)
    }

    /// Faces whose stored matching is not inverse to the matching computed with the roles of the crossings swapped.
    pub fn verify_inverse_symmetry(&self) -> Vec<FaceKey> {
        let mut bad = Vec::new();
        for (&face, pairs) in &self.matchings {
            let side = if self.flipped.contains(&face) { Side::Right } else { Side::Left };
            let ok = self.fibers(face).values().filter(|(p1, _)| p1.len() >= 2).all(|(p1, p2)| {
                match self.ladybug_match_swapped(face, p2, p1, side) {
                    Ok(back) => back.iter().all(|(b, a)| pairs.contains(&(*a, *b))),
                    Err(_) => false,
                }
            });
            if !ok {
                bad.push(face);
            }
        }
        bad
    }

    /// Ladybug matching computed with c2 as the first crossing.
    fn ladybug_match_swapped(&self, face: FaceKey, p2: &[Chain], p1: &[Chain], side: Side) -> Result<Vec<(Chain, Chain)>> {
        let (u, c1, c2) = face;
        let (v1, v2) = (u | 1 << c1, u | 1 << c2);
        let pos = crossing_positions(&self.word);
        let s1 = site_at(&self.confs[u], c1, pos[c1].0, pos[c1].1);
        let s2 = site_at(&self.confs[u], c2, pos[c2].0, pos[c2].1);
        let circles = ladybug_pairs(&self.confs[u], &self.confs[v2], &self.confs[v1], &s2, &s1, side)?;
        let e1 = self.edge(u, c1);
        let e2 = self.edge(u, c2);
        let mut out = Vec::new();
        for &ch2 in p2 {
            let y2 = e2.elements[ch2.0].y;
            let partners: Vec<Chain> = p1
                .iter()
                .copied()
                .filter(|ch| circles.iter().all(|&(b, a)| (y2 >> b & 1) == (e1.elements[ch.0].y >> a & 1)))
                .collect();
            if partners.len() != 1 {
                return Err(Error::Ambiguity(format!("{}: swapped matching is not a bijection", face_name(face))));
            }
            out.push((ch2, partners[0]));
        }
        Ok(out)
    }

    /// Hexagon relation on every 3-subcube.
    pub fn verify_hexagons(&self) -> HexagonReport {
        let n = self.n();
        let mut report = HexagonReport::default();
        if n < 3 {
            return report;
        }
        let maps: HashMap<FaceKey, Result<(HashMap<Chain, Chain>, HashMap<Chain, Chain>)>> = self
            .faces()
            .into_par_iter()
            .map(|f| {
                let m = self.face_map(f).map(|fwd| {
                    let inv = fwd.iter().map(|(a, b)| (*b, *a)).collect();
                    (fwd, inv)
                });
                (f, m)
            })
            .collect();
        // step through the face between coordinates a and b at vertex v, from "a first" to "b first"
        let step = |v: usize, a: usize, b: usize, ch: Chain| -> Option<Chain> {
            let (lo, hi) = (a.min(b), a.max(b));
            let (fwd, inv) = maps.get(&(v, lo, hi))?.as_ref().ok()?;
            if a < b {
                fwd.get(&ch).copied()
            } else {
                inv.get(&ch).copied()
            }
        };
        let cubes: Vec<(usize, [usize; 3])> = (0..1usize << n)
            .flat_map(|u| {
                let free: Vec<usize> = (0..n).filter(|&c| u >> c & 1 == 0).collect();
                let mut out = Vec::new();
                for i in 0..free.len() {
                    for j in i + 1..free.len() {
                        for k in j + 1..free.len() {
                            out.push((u, [free[i], free[j], free[k]]));
                        }
                    }
                }
                out
            })
            .collect();
        let results: Vec<(usize, [usize; 3], bool, bool)> = cubes
            .into_par_iter()
            .map(|(u, [a, b, c])| {
                let e1 = self.edge(u, a);
                let e2 = self.edge(u | 1 << a, b);
                let e3 = self.edge(u | 1 << a | 1 << b, c);
                let mut triples = Vec::new();
                let mut fiber: HashMap<(usize, usize, u32), usize> = HashMap::new();
                for (i1, x1) in e1.elements.iter().enumerate() {
                    for (i2, x2) in e2.elements.iter().enumerate().filter(|(_, x2)| x2.x == x1.y) {
                        for (i3, x3) in e3.elements.iter().enumerate().filter(|(_, x3)| x3.x == x2.y) {
                            triples.push((i1, i2, i3));
                            *fiber.entry((x1.x, x3.y, (x1.shift + x2.shift + x3.shift) % self.r)).or_default() += 1;
                        }
                    }
                }
                if fiber.values().all(|&c| c <= 1) {
                    return (u, [a, b, c], true, true);
                }
                let ok = triples.iter().all(|&(i1, i2, i3)| {
                    let mut order = [a, b, c];
                    let mut ch = (i1, i2, i3);
                    for s in 0..6 {
                        let next = if s % 2 == 0 {
                            step(u, order[0], order[1], (ch.0, ch.1)).map(|(j1, j2)| (j1, j2, ch.2))
                        } else {
                            step(u | 1 << order[0], order[1], order[2], (ch.1, ch.2)).map(|(j2, j3)| (ch.0, j2, j3))
                        };
                        match next {
                            Some(nc) => ch = nc,
                            None => return false,
                        }
                        if s % 2 == 0 {
                            order.swap(0, 1);
                        } else {
                            order.swap(1, 2);
                        }
                    }
                    ch == (i1, i2, i3) && order == [a, b, c]
                });
                (u, [a, b, c], false, ok)
            })
            .collect();
        for (u, cube, simple, ok) in results {
            report.cubes += 1;
            if simple {
                report.simple += 1;
            }
            if !ok {
                report.failures.push((u, cube));
            }
        }
        report
    }

    /// Tot(F): free k_r-modules on Γ(u), entries summed over correspondence fibers.
    pub fn totalize(&self) -> CubeComplex {
        let ring = if self.r == 1 { Ring::Integer } else { Ring::Cyclotomic(self.r) };
        let vertices = self
            .confs
            .iter()
            .enumerate()
            .map(|(i, c)| Vertex { u: bits_vertex(i, self.n()), conf: c.clone() })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let mut cols: Vec<BTreeMap<usize, Laurent>> = vec![BTreeMap::new(); self.vertices[e.from].gens];
                for el in &e.elements {
                    cols[el.x].entry(el.y).or_default().add_term(1, el.shift as i64);
                }
                Edge {
                    from: e.from,
                    to: e.to,
                    crossing: e.crossing,
                    sign: e.sign,
                    kind: e.kind.unwrap_or(SaddleType::MergeTrivial),
                    matrix: LMatrix::from_columns(self.vertices[e.to].gens, cols),
                }
            })
            .collect();
        CubeComplex::from_parts(&self.word, ring, vertices, edges)
    }

    /// F/G over the trivial group, with the induced 2-morphisms.
    pub fn quotient(&self) -> Result<BurnsideFunctor> {
        let mut q = self.clone();
        q.r = 1;
        q.vertices = self.vertices.iter().map(|v| GSet { r: 1, gens: v.gens }).collect();
        for e in q.edges.iter_mut() {
            for el in e.elements.iter_mut() {
                el.shift = 0;
            }
        }
        let mut matchings = BTreeMap::new();
        for face in self.faces() {
            let map = self.face_map(face)?;
            let pairs: Vec<(Chain, Chain)> = q
                .fibers(face)
                .into_values()
                .filter(|(p1, _)| p1.len() >= 2)
                .flat_map(|(p1, _)| p1.into_iter().map(|c| (c, map[&c])))
                .collect();
            if !pairs.is_empty() {
                matchings.insert(face, pairs);
            }
        }
        q.matchings = matchings;
        Ok(q)
    }

    /// Functor export: vertices, correspondence elements and matching tables.
    pub fn export_json(&self) -> serde_json::Value {
        let vertices: Vec<_> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = &self.confs[i];
                serde_json::json!({
                    "index": i,
                    "u": bits_vertex(i, self.n()).iter().map(|&b| b as u8).collect::<Vec<_>>(),
                    "generators": v.gens,
                    "essential": c.n_essential,
                    "trivial": c.n_trivial(),
                })
            })
            .collect();
        let matchings: Vec<_> = self
            .matchings
            .iter()
            .map(|(&(v, c1, c2), pairs)| serde_json::json!({ "vertex": v, "crossings": [c1, c2], "pairs": pairs }))
            .collect();
        serde_json::json!({
            "r": self.r,
            "policy": self.policy,
            "word": serde_json::from_str::<serde_json::Value>(&self.word.to_json()).unwrap_or(serde_json::Value::Null),
            "vertices": vertices,
            "edges": self.edges,
            "matchings": matchings,
        })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HexagonReport {
    pub cubes: usize,
    /// Cubes whose three-step fibers are all singletons.
    pub simple: usize,
    pub failures: Vec<(usize, [usize; 3])>,
}

impl HexagonReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Vertexwise bijections ψ_u(q^l x) = q^{l + m} x' given as (m, x') per generator.
pub type VertexShifts = Vec<Vec<(u32, usize)>>;

/// Outcome of checking a candidate natural isomorphism.
#[derive(Clone, Debug, Default, Serialize)]
pub struct NaturalIsoCertificate {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Faces carrying a stored ladybug matching on either side.
    pub ladybug_faces: usize,
    /// Generators moved by a nonzero power of q.
    pub shifted_generators: usize,
}

/// Checks conditions NI1-NI3 for ψ and the commuting square of 2-morphisms on every face.
pub fn natural_iso(f1: &BurnsideFunctor, f0: &BurnsideFunctor, psi: &VertexShifts) -> Result<NaturalIsoCertificate> {
    if f1.r != f0.r || f1.vertices.len() != f0.vertices.len() || f1.edges.len() != f0.edges.len() {
        return Err(Error::Mismatch("functors live on different cubes or groups".into()));
    }
    let r = f1.r;
    for (u, (a, b)) in f1.vertices.iter().zip(&f0.vertices).enumerate() {
        let image: BTreeSet<usize> = psi[u].iter().map(|p| p.1).collect();
        if a.gens != b.gens || psi[u].len() != a.gens || image.len() != a.gens {
            return Err(Error::Mismatch(format!("vertex {u}: ψ is not a bijection")));
        }
    }
    // NI2: ψ_u × ψ_v restricts to a bijection of correspondences
    let mut element_maps = Vec::with_capacity(f1.edges.len());
    for (e1, e0) in f1.edges.iter().zip(&f0.edges) {
        if (e1.from, e1.crossing, e1.sign) != (e0.from, e0.crossing, e0.sign) {
            return Err(Error::Mismatch(format!("edge {} -> {}: edges out of order", e1.from, e1.to)));
        }
        let mut pool: HashMap<Element, Vec<usize>> = HashMap::new();
        for (i, el) in e0.elements.iter().enumerate() {
            pool.entry(*el).or_default().push(i);
        }
        let mut map = Vec::with_capacity(e1.elements.len());
        for el in &e1.elements {
            let (mx, x) = psi[e1.from][el.x];
            let (my, y) = psi[e1.to][el.y];
            let shift = (el.shift + my + r - mx % r) % r;
            let img = Element { x, y, shift };
            let i = pool
                .get_mut(&img)
                .and_then(|v| v.pop())
                .ok_or_else(|| Error::Mismatch(format!("edge {} -> {}: element {el:?} has no image", e1.from, e1.to)))?;
            map.push(i);
        }
        if pool.values().any(|v| !v.is_empty()) {
            return Err(Error::Mismatch(format!("edge {} -> {}: ψ misses elements", e1.from, e1.to)));
        }
        element_maps.push(map);
    }
    // commuting square of 2-morphisms on every face
    let faces = f1.faces();
    faces.par_iter().try_for_each(|&face| {
        let (u, c1, c2) = face;
        let m1 = f1.face_map(face)?;
        let m0 = f0.face_map(face)?;
        let ea = f1.edge_index(u, c1);
        let eb = f1.edge_index(u | 1 << c1, c2);
        let ea2 = f1.edge_index(u, c2);
        let eb2 = f1.edge_index(u | 1 << c2, c1);
        for (ch, img) in &m1 {
            let mapped = (element_maps[ea][ch.0], element_maps[eb][ch.1]);
            let expect = (element_maps[ea2][img.0], element_maps[eb2][img.1]);
            if m0.get(&mapped) != Some(&expect) {
                return Err(Error::Mismatch(format!("{}: 2-morphisms do not commute with ψ", face_name(face))));
            }
        }
        Ok(())
    })?;
    let ladybug_faces = faces.iter().filter(|f| f1.matchings.contains_key(f) || f0.matchings.contains_key(f)).count();
    Ok(NaturalIsoCertificate {
        vertices: f1.vertices.len(),
        edges: f1.edges.len(),
        faces: faces.len(),
        ladybug_faces,
        shifted_generators: psi.iter().flatten().filter(|p| p.0 % r.max(1) != 0).count(),
    })
}

fn identity_shifts(f: &BurnsideFunctor) -> VertexShifts {
    f.vertices.iter().map(|v| (0..v.gens).map(|x| (0, x)).collect()).collect()
}

/// Certificate that F_q/G is naturally isomorphic to the classical functor.
pub fn compare_with_classical(f: &BurnsideFunctor, word: &TangleWord) -> Result<NaturalIsoCertificate> {
    let quotient = f.quotient()?;
    let classical = classical_functor(word)?;
    natural_iso(&quotient, &classical, &identity_shifts(&quotient))
}

/// Certificate for K^{±1}: q^l x ↦ q^{l ± adeg(x)} x, including the chain-level identity K d = d K.
pub fn k_automorphism(f: &BurnsideFunctor, inverse: bool) -> Result<NaturalIsoCertificate> {
    let r = f.r as i64;
    let sign = if inverse { -1 } else { 1 };
    let psi: VertexShifts = f
        .vertices
        .iter()
        .enumerate()
        .map(|(u, v)| (0..v.gens).map(|x| ((sign * adeg_of(x, &f.confs[u])).rem_euclid(r) as u32, x)).collect())
        .collect();
    let cert = natural_iso(f, f, &psi)?;
    let tot = f.totalize();
    let k_matrix = |u: usize| {
        LMatrix::diagonal(psi[u].iter().map(|&(m, _)| Laurent::monomial(1, m as i64)).collect())
    };
    for e in &tot.edges {
        let lhs = k_matrix(e.to).mul(&e.matrix).reduce(f.r);
        let rhs = e.matrix.mul(&k_matrix(e.from)).reduce(f.r);
        if lhs != rhs {
            return Err(Error::Mismatch(format!("edge {} -> {}: K does not commute with d", e.from, e.to)));
        }
    }
    Ok(cert)
}

/// Searches for a diagonal natural isomorphism ψ(q^l x) = q^{l + m_x} x from `f1` to `f0`.
pub fn diagonal_iso(f1: &BurnsideFunctor, f0: &BurnsideFunctor) -> Result<(VertexShifts, NaturalIsoCertificate)> {
    let r = f1.r;
    if r != f0.r || f1.vertices.len() != f0.vertices.len() {
        return Err(Error::Mismatch("functors live on different cubes or groups".into()));
    }
    // potential graph on (vertex, generator): m_y - m_x = shift0 - shift1
    let mut adj: HashMap<(usize, usize), Vec<((usize, usize), i64)>> = HashMap::new();
    for (e1, e0) in f1.edges.iter().zip(&f0.edges) {
        let support0: HashMap<(usize, usize), u32> = e0.elements.iter().map(|el| ((el.x, el.y), el.shift)).collect();
        for el in &e1.elements {
            let s0 = *support0
                .get(&(el.x, el.y))
                .ok_or_else(|| Error::Mismatch(format!("edge {} -> {}: supports differ", e1.from, e1.to)))?;
            let d = s0 as i64 - el.shift as i64;
            adj.entry((e1.from, el.x)).or_default().push(((e1.to, el.y), d));
            adj.entry((e1.to, el.y)).or_default().push(((e1.from, el.x), -d));
        }
    }
    let mut m: Vec<Vec<Option<i64>>> = f1.vertices.iter().map(|v| vec![None; v.gens]).collect();
    for u in 0..m.len() {
        for x in 0..m[u].len() {
            if m[u][x].is_some() {
                continue;
            }
            m[u][x] = Some(0);
            let mut queue = VecDeque::from([(u, x)]);
            while let Some(node) = queue.pop_front() {
                let here = m[node.0][node.1].unwrap();
                for &(next, d) in adj.get(&node).map(|v| v.as_slice()).unwrap_or(&[]) {
                    let want = (here + d).rem_euclid(r as i64);
                    match m[next.0][next.1] {
                        None => {
                            m[next.0][next.1] = Some(want);
                            queue.push_back(next);
                        }
                        Some(have) if have != want => {
                            return Err(Error::Mismatch(format!("no diagonal isomorphism: conflict at vertex {}", next.0)));
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    let psi: VertexShifts =
        m.iter().map(|row| row.iter().enumerate().map(|(x, s)| (s.unwrap() as u32, x)).collect()).collect();
    let cert = natural_iso(f1, f0, &psi)?;
    Ok((psi, cert))
}
