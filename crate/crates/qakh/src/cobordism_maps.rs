//! Chain maps of elementary annular cobordisms, movies, and sweep surfaces.
//!
//! Maps are expressed in the normalized generator bases used by
//! [`build_complex`]. A [`ChainMap`] stores one matrix over all generators,
//! ordered vertex by vertex.

use crate::cobordism_calc::{eval_saddle, standardization_weight, WeightScheme};
use crate::complex::{build_complex, crossing_positions, CubeComplex, Ring, Tridegree};
use crate::diagram::{site_at, Configuration, FlatSlice, FlatTangle, Slice, TangleWord};
use crate::error::{Error, Result};
use crate::matrix::LMatrix;
use crate::scalar::Laurent;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeamDirection {
    /// The first slice passes through the seam and becomes the last.
    Up,
    /// The last slice passes through the seam and becomes the first.
    Down,
}

/// Crossing-through-seam variants: (a) positive up, (b) positive down,
/// (c) negative up, (d) negative down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingSlide {
    A,
    B,
    C,
    D,
}

impl CrossingSlide {
    fn sign(self) -> i8 {
        match self {
            CrossingSlide::A | CrossingSlide::B => 1,
            CrossingSlide::C | CrossingSlide::D => -1,
        }
    }

    fn direction(self) -> SeamDirection {
        match self {
            CrossingSlide::A | CrossingSlide::C => SeamDirection::Up,
            CrossingSlide::B | CrossingSlide::D => SeamDirection::Down,
        }
    }

    /// q-weight of the turnback smoothing for the upward moves.
    fn up_weight(sign: i8) -> i64 {
        if sign > 0 {
            1
        } else {
            -1
        }
    }
}

/// An elementary move together with its location in the source word.
/// `slice` is the index of the first affected slice; `i` is a 1-based strand position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "move")]
pub enum Move {
    /// Insert the kink `cup(i+1), x(i, sign), cap(i+1)` before `slice`.
    R1 { slice: usize, i: usize, sign: i8 },
    /// Remove such a kink starting at `slice`.
    R1inv { slice: usize },
    /// Insert `x(i, sign), x(i, -sign)` before `slice`.
    R2 { slice: usize, i: usize, sign: i8 },
    R2inv { slice: usize },
    /// Insert `cup(i), cap(i)`: a new seam-free circle.
    Birth { slice: usize, i: usize },
    /// Remove `cup(i), cap(i)`; the undotted cap reads off `w-`, the dotted one `w+`.
    Death {
        slice: usize,
        #[serde(default)]
        dotted: bool,
    },
    /// Saddle between `cap(i), cup(i)` and two parallel strands; `remove` goes from the former.
    SaddleMove { slice: usize, i: usize, remove: bool },
    SeamSlideArc { direction: SeamDirection },
    SeamSlideCrossing { variant: CrossingSlide },
}

impl Move {
    pub fn tag(&self) -> &'static str {
        match self {
            Move::R1 { .. } => "R1",
            Move::R1inv { .. } => "R1inv",
            Move::R2 { .. } => "R2",
            Move::R2inv { .. } => "R2inv",
            Move::Birth { .. } => "Birth",
            Move::Death { .. } => "Death",
            Move::SaddleMove { .. } => "SaddleMove",
            Move::SeamSlideArc { .. } => "SeamSlideArc",
            Move::SeamSlideCrossing { variant: CrossingSlide::A } => "SeamSlideCrossing(a)",
            Move::SeamSlideCrossing { variant: CrossingSlide::B } => "SeamSlideCrossing(b)",
            Move::SeamSlideCrossing { variant: CrossingSlide::C } => "SeamSlideCrossing(c)",
            Move::SeamSlideCrossing { variant: CrossingSlide::D } => "SeamSlideCrossing(d)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryCobordism {
    pub mv: Move,
    pub source: TangleWord,
    pub target: TangleWord,
}

fn splice(w: &TangleWord, at: usize, remove: usize, insert: &[Slice], k: usize) -> Result<TangleWord> {
    let mut s = w.slices.clone();
    s.splice(at..at + remove, insert.iter().copied());
    TangleWord::new(k, w.r, s).map_err(|e| Error::Location(format!("edited word is invalid: {e}")))
}

/// Location check for a pattern of `len` slices starting at `slice`.
fn pattern_at(w: &TangleWord, slice: usize, len: usize, what: &str, ok: impl Fn(&[Slice]) -> bool) -> Result<()> {
    let n = w.slices.len();
    if slice + len <= n {
        if ok(&w.slices[slice..slice + len]) {
            return Ok(());
        }
        return Err(Error::Location(format!("no {what} at slice {slice}")));
    }
    if n >= len && slice < n {
        let wrapped: Vec<Slice> = (0..len).map(|d| w.slices[(slice + d) % n]).collect();
        if ok(&wrapped) {
            return Err(Error::Location(format!("{what} at slice {slice} crosses the seam")));
        }
    }
    Err(Error::Location(format!("no {what} at slice {slice}")))
}

fn width_at(w: &TangleWord, slice: usize) -> Result<usize> {
    w.widths()
        .get(slice)
        .copied()
        .ok_or_else(|| Error::Location(format!("slice {slice} is past the end of a word with {} slices", w.slices.len())))
}

pub fn rotate_up(w: &TangleWord) -> TangleWord {
    let mut s = w.slices.clone();
    let first = s.remove(0);
    let k = match first {
        Slice::Cup { .. } => w.k + 2,
        Slice::Cap { .. } => w.k - 2,
        Slice::Crossing { .. } => w.k,
    };
    s.push(first);
    TangleWord { k, r: w.r, slices: s }
}

pub fn rotate_down(w: &TangleWord) -> TangleWord {
    let mut s = w.slices.clone();
    let last = s.pop().expect("non-empty word");
    let k = match last {
        Slice::Cup { .. } => w.k - 2,
        Slice::Cap { .. } => w.k + 2,
        Slice::Crossing { .. } => w.k,
    };
    s.insert(0, last);
    TangleWord { k, r: w.r, slices: s }
}

impl ElementaryCobordism {
    pub fn new(source: &TangleWord, mv: Move) -> Result<Self> {
        let target = apply_move(source, mv)?;
        Ok(Self { mv, source: source.clone(), target })
    }

    pub fn tag(&self) -> &'static str {
        self.mv.tag()
    }
}

fn apply_move(w: &TangleWord, mv: Move) -> Result<TangleWord> {
    let n = w.slices.len();
    match mv {
        Move::R1 { slice, i, sign } => {
            let width = width_at(w, slice)?;
            if i < 1 || i > width || sign.abs() != 1 {
                return Err(Error::Location(format!("no strand {i} at slice {slice} for a kink of sign {sign}")));
            }
            let kink = [Slice::Cup { i: i + 1 }, Slice::Crossing { i, sign }, Slice::Cap { i: i + 1 }];
            splice(w, slice, 0, &kink, w.k)
        }
        Move::R1inv { slice } => {
            pattern_at(w, slice, 3, "kink", |s| {
                matches!(s, [Slice::Cup { i: a }, Slice::Crossing { i: b, .. }, Slice::Cap { i: c }] if a == c && *b + 1 == *a)
            })?;
            splice(w, slice, 3, &[], w.k)
        }
        Move::R2 { slice, i, sign } => {
            let width = width_at(w, slice)?;
            if i < 1 || i + 1 > width || sign.abs() != 1 {
                return Err(Error::Location(format!("no strands {i}, {} at slice {slice}", i + 1)));
            }
            splice(w, slice, 0, &[Slice::Crossing { i, sign }, Slice::Crossing { i, sign: -sign }], w.k)
        }
        Move::R2inv { slice } => {
            pattern_at(w, slice, 2, "cancelling crossing pair", |s| {
                matches!(s, [Slice::Crossing { i: a, sign: x }, Slice::Crossing { i: b, sign: y }] if a == b && *x == -*y)
            })?;
            splice(w, slice, 2, &[], w.k)
        }
        Move::Birth { slice, i } => {
            let width = width_at(w, slice)?;
            if i < 1 || i > width + 1 {
                return Err(Error::Location(format!("no gap {i} at slice {slice}")));
            }
            splice(w, slice, 0, &[Slice::Cup { i }, Slice::Cap { i }], w.k)
        }
        Move::Death { slice, .. } => {
            pattern_at(w, slice, 2, "small circle", |s| matches!(s, [Slice::Cup { i: a }, Slice::Cap { i: b }] if a == b))?;
            splice(w, slice, 2, &[], w.k)
        }
        Move::SaddleMove { slice, i, remove: true } => {
            pattern_at(w, slice, 2, "cap-cup pair", |s| {
                matches!(s, [Slice::Cap { i: a }, Slice::Cup { i: b }] if *a == i && *b == i)
            })?;
            splice(w, slice, 2, &[], w.k)
        }
        Move::SaddleMove { slice, i, remove: false } => {
            let width = width_at(w, slice)?;
            if i < 1 || i + 1 > width {
                return Err(Error::Location(format!("no strands {i}, {} at slice {slice}", i + 1)));
            }
            splice(w, slice, 0, &[Slice::Cap { i }, Slice::Cup { i }], w.k)
        }
        Move::SeamSlideArc { direction } => {
            let s = match direction {
                SeamDirection::Up => w.slices.first(),
                SeamDirection::Down => w.slices.last(),
            };
            match s {
                Some(Slice::Cup { .. } | Slice::Cap { .. }) => Ok(match direction {
                    SeamDirection::Up => rotate_up(w),
                    SeamDirection::Down => rotate_down(w),
                }),
                _ => Err(Error::Location("no cup or cap next to the seam".into())),
            }
        }
        Move::SeamSlideCrossing { variant } => {
            let s = match variant.direction() {
                SeamDirection::Up => w.slices.first(),
                SeamDirection::Down => w.slices.last(),
            };
            match s {
                Some(Slice::Crossing { sign, .. }) if *sign == variant.sign() => Ok(match variant.direction() {
                    SeamDirection::Up => rotate_up(w),
                    SeamDirection::Down => rotate_down(w),
                }),
                _ if n == 0 => Err(Error::Location("empty word has nothing next to the seam".into())),
                _ => Err(Error::Location(format!("no crossing of sign {} next to the seam", variant.sign()))),
            }
        }
    }
}

/// Generators of a complex in vertex-major order: `offsets[v]` is the index of (v, 0).
pub fn offsets(c: &CubeComplex) -> Vec<usize> {
    let mut out = Vec::with_capacity(c.vertices.len() + 1);
    let mut acc = 0;
    for v in &c.vertices {
        out.push(acc);
        acc += v.rank();
    }
    out.push(acc);
    out
}

/// The signed differential as one square matrix.
pub fn total_differential(c: &CubeComplex) -> LMatrix {
    let off = offsets(c);
    let n = off[c.vertices.len()];
    let mut cols: Vec<BTreeMap<usize, Laurent>> = vec![BTreeMap::new(); n];
    for e in &c.edges {
        let m = e.signed();
        for (i, j, v) in m.entries() {
            *cols[off[e.from] + j].entry(off[e.to] + i).or_default() += v;
        }
    }
    LMatrix::from_columns(n, cols)
}

#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: CubeComplex,
    pub target: CubeComplex,
    /// Rows index target generators, columns source generators.
    pub matrix: LMatrix,
    /// Uniform change of (h, j, k) on every nonzero entry; `None` for the zero map.
    pub shift: Option<Tridegree>,
}

fn gen_index(c: &CubeComplex) -> Vec<(usize, usize)> {
    c.vertices.iter().enumerate().flat_map(|(v, vx)| (0..vx.rank()).map(move |g| (v, g))).collect()
}

impl ChainMap {
    pub fn new(source: CubeComplex, target: CubeComplex, matrix: LMatrix) -> Result<Self> {
        let ring = source.ring;
        if target.ring != ring {
            return Err(Error::Glue("source and target complexes live over different rings".into()));
        }
        let matrix = matrix.map_entries(|x| ring.normalize(x));
        let (gs, gt) = (gen_index(&source), gen_index(&target));
        let mut shift = None;
        for (i, j, _) in matrix.entries() {
            let a = source.tridegree(gs[j].0, gs[j].1);
            let b = target.tridegree(gt[i].0, gt[i].1);
            let d = Tridegree { h: b.h - a.h, j: b.j - a.j, k: b.k - a.k };
            match shift {
                None => shift = Some(d),
                Some(s) if s != d => {
                    return Err(Error::Mismatch(format!("map mixes grading shifts {s:?} and {d:?}")));
                }
                _ => {}
            }
        }
        Ok(Self { source, target, matrix, shift })
    }

    pub fn identity(c: &CubeComplex) -> Self {
        let n = offsets(c)[c.vertices.len()];
        Self::new(c.clone(), c.clone(), LMatrix::identity(n)).expect("identity is homogeneous")
    }

    pub fn ring(&self) -> Ring {
        self.source.ring
    }

    /// d_target * M - M * d_source, normalized into the ring.
    pub fn commutator(&self) -> LMatrix {
        let ring = self.ring();
        let a = total_differential(&self.target).mul(&self.matrix);
        let b = self.matrix.mul(&total_differential(&self.source));
        a.sub(&b).map_entries(|x| ring.normalize(x))
    }

    pub fn is_chain_map(&self) -> bool {
        self.commutator().is_zero()
    }

    /// `next` after `self`.
    pub fn then(&self, next: &ChainMap) -> Result<ChainMap> {
        if self.target.word.k != next.source.word.k || self.target.word.slices != next.source.word.slices {
            return Err(Error::Glue(format!(
                "target {} does not match source {}",
                self.target.word.to_json(),
                next.source.word.to_json()
            )));
        }
        Self::new(self.source.clone(), next.target.clone(), next.matrix.mul(&self.matrix))
    }

    pub fn is_identity(&self) -> bool {
        let n = self.matrix.cols;
        self.matrix.rows == n && self.matrix.sub(&LMatrix::identity(n)).map_entries(|x| self.ring().normalize(x)).is_zero()
    }

    /// The single entry of a map between complexes of rank one (closed surfaces).
    pub fn scalar(&self) -> Option<Laurent> {
        (self.matrix.rows == 1 && self.matrix.cols == 1).then(|| self.matrix.get(0, 0))
    }
}

fn unit_inverse(x: &Laurent, ring: Ring) -> Result<Laurent> {
    match x.as_monomial() {
        Some((c, e)) if c == 1 || c == -1 => Ok(ring.normalize(&Laurent::monomial(c, -e))),
        _ => Err(Error::Calibration(format!("{x} is not a unit"))),
    }
}

/// Inverse of a matrix with exactly one unit entry in every row and column.
fn invert_monomial(m: &LMatrix, ring: Ring) -> Result<LMatrix> {
    if m.rows != m.cols || m.nnz() != m.cols {
        return Err(Error::Calibration("map is not a monomial isomorphism".into()));
    }
    let mut cols: Vec<BTreeMap<usize, Laurent>> = vec![BTreeMap::new(); m.rows];
    for (i, j, v) in m.entries() {
        if cols[i].insert(j, unit_inverse(v, ring)?).is_some() {
            return Err(Error::Calibration("map is not a monomial isomorphism".into()));
        }
    }
    Ok(LMatrix::from_columns(m.cols, cols))
}

/// Circle of `b` containing the image of each circle of `a`, or `None` when the
/// circle has no node that `node_map` sends across.
fn circle_map(a: &Configuration, b: &Configuration, node_map: &dyn Fn(usize) -> Option<usize>) -> Vec<Option<usize>> {
    a.circles.iter().map(|c| c.nodes.iter().find_map(|&n| node_map(n)).map(|m| b.circle_of(m))).collect()
}

/// Transport a generator index along a circle map; circles mapped to `None` are dropped.
fn transport(x: usize, cm: &[Option<usize>]) -> usize {
    cm.iter().enumerate().filter(|&(i, _)| x >> i & 1 == 1).filter_map(|(_, &j)| j).map(|j| 1 << j).sum()
}

/// Node map between flat tangles that agree outside a block: levels up to `at`
/// are shared and levels from `at + m1` on are shifted by `m2 - m1`.
/// `real1` is the unpadded length of the first tangle.
fn outside_map<'a>(
    t1: &'a FlatTangle,
    t2: &'a FlatTangle,
    real1: usize,
    at: usize,
    m1: usize,
    m2: usize,
) -> impl Fn(usize) -> Option<usize> + 'a {
    move |n| {
        let (lv, j) = t1.node_pos(n);
        if lv > real1 {
            None
        } else if lv <= at {
            Some(t2.node(lv, j))
        } else if lv >= at + m1 {
            Some(t2.node(lv + m2 - m1, j))
        } else {
            None
        }
    }
}

fn nu(c: &Configuration, scheme: &WeightScheme) -> i64 {
    standardization_weight(c, scheme)
}

/// Assemble a map from per-source-generator images `(target vertex, generator, coefficient)`.
fn assemble_map(
    s: &CubeComplex,
    t: &CubeComplex,
    image: impl Fn(usize, usize) -> Result<Vec<(usize, usize, Laurent)>>,
) -> Result<LMatrix> {
    let (os, ot) = (offsets(s), offsets(t));
    let mut cols = Vec::with_capacity(os[s.vertices.len()]);
    for (u, v) in s.vertices.iter().enumerate() {
        for x in 0..v.rank() {
            let mut col: BTreeMap<usize, Laurent> = BTreeMap::new();
            for (tv, y, c) in image(u, x)? {
                *col.entry(ot[tv] + y).or_default() += &c;
            }
            cols.push(col);
        }
    }
    Ok(LMatrix::from_columns(ot[t.vertices.len()], cols))
}

/// Net seam weight of the trivial circles that meet the seam: +1 per `+`, -1 per `-`.
fn seam_label_weight(c: &Configuration, x: usize) -> i64 {
    (c.n_essential..c.circles.len())
        .filter(|&i| !c.circles[i].seam_free())
        .map(|i| if x >> i & 1 == 1 { -1 } else { 1 })
        .sum()
}

/// Move the first slice of `s.word` through the seam; `t` is the complex of the rotated word.
fn slide_up(s: &CubeComplex, t: &CubeComplex, scheme: &WeightScheme) -> Result<LMatrix> {
    let w = &s.word;
    let l = w.slices.len();
    let cp1 = crossing_positions(w);
    let cp2 = crossing_positions(&t.word);
    let cmap: Vec<usize> = cp1
        .iter()
        .map(|&(sl, p)| {
            let s2 = if sl == 0 { l - 1 } else { sl - 1 };
            cp2.iter().position(|&(tl, q)| tl == s2 && q == p).expect("rotated crossing")
        })
        .collect();
    let vmap = |u: usize| -> usize { cmap.iter().enumerate().filter(|&(i, _)| u >> i & 1 == 1).map(|(_, &j)| 1 << j).sum() };
    let first = w.slices[0];
    let n1_of = |u: usize| u.count_ones() as i64;
    assemble_map(s, t, |u, x| {
        let cu = &s.vertices[u].conf;
        let v = vmap(u);
        let cv = &t.vertices[v].conf;
        let (t1, t2) = (&cu.tangle, &cv.tangle);
        let map = |n: usize| {
            let (lv, j) = t1.node_pos(n);
            Some(if lv == 0 { t2.node(l - 1, j) } else { t2.node(lv - 1, j) })
        };
        let cm = circle_map(cu, cv, &map);
        let y = transport(x, &cm);
        let mut e = nu(cv, scheme) - nu(cu, scheme);
        let mut sign = 1;
        match first {
            Slice::Cap { .. } => e += seam_label_weight(cu, x) - seam_label_weight(cv, y),
            Slice::Cup { .. } => {}
            Slice::Crossing { i, sign: cs } => {
                if let FlatSlice::Turnback(_) = t1.slices[0] {
                    e += CrossingSlide::up_weight(cs);
                    let lo = cu.circle_of(t1.node(0, i - 1));
                    let hugs = cu.circles[lo].nodes.iter().all(|&nd| {
                        let (lv, p) = t1.node_pos(nd);
                        lv != 0 || p == i - 1 || p == i
                    });
                    if lo >= cu.n_essential && hugs {
                        e += if x >> lo & 1 == 1 { -1 } else { 1 };
                    }
                }
                // The moved crossing is crossing 0; it becomes the last one.
                let uc = (u & 1) as i64;
                if uc * (n1_of(u) - uc) % 2 == 1 {
                    sign = -1;
                }
            }
        }
        Ok(vec![(v, y, Laurent::monomial(sign, e))])
    })
}

/// A block edit that keeps every crossing: vertex u maps to vertex u.
struct BlockEdit {
    at: usize,
    removed: usize,
    inserted: usize,
}

impl BlockEdit {
    fn circles(&self, s: &CubeComplex, t: &CubeComplex, u: usize) -> Vec<Option<usize>> {
        let (cu, cv) = (&s.vertices[u].conf, &t.vertices[u].conf);
        let map = outside_map(&cu.tangle, &cv.tangle, s.word.slices.len(), self.at, self.removed, self.inserted);
        circle_map(cu, cv, &map)
    }
}

fn birth_map(s: &CubeComplex, t: &CubeComplex, at: usize, scheme: &WeightScheme) -> Result<LMatrix> {
    let edit = BlockEdit { at, removed: 0, inserted: 2 };
    assemble_map(s, t, |u, x| {
        let cm = edit.circles(s, t, u);
        let (cu, cv) = (&s.vertices[u].conf, &t.vertices[u].conf);
        Ok(vec![(u, transport(x, &cm), Laurent::monomial(1, nu(cv, scheme) - nu(cu, scheme)))])
    })
}

fn death_map(s: &CubeComplex, t: &CubeComplex, at: usize, dotted: bool, scheme: &WeightScheme) -> Result<LMatrix> {
    let edit = BlockEdit { at, removed: 2, inserted: 0 };
    assemble_map(s, t, |u, x| {
        let cm = edit.circles(s, t, u);
        let dying = cm.iter().position(|c| c.is_none()).ok_or_else(|| Error::Topology("no small circle to cap off".into()))?;
        let minus = x >> dying & 1 == 1;
        if minus == dotted {
            return Ok(vec![]);
        }
        let (cu, cv) = (&s.vertices[u].conf, &t.vertices[u].conf);
        Ok(vec![(u, transport(x, &cm), Laurent::monomial(1, nu(cv, scheme) - nu(cu, scheme)))])
    })
}

/// Unpadded flat slices of a configuration's tangle.
fn real_slices(c: &Configuration, real_len: usize) -> Vec<FlatSlice> {
    c.tangle.slices[..real_len].to_vec()
}

fn saddle_map(s: &CubeComplex, t: &CubeComplex, at: usize, i: usize, remove: bool, scheme: &WeightScheme) -> Result<LMatrix> {
    let (ls, lt) = (s.word.slices.len(), t.word.slices.len());
    let k = s.word.k;
    assemble_map(s, t, |u, x| {
        let (cu, cv) = (&s.vertices[u].conf, &t.vertices[u].conf);
        // Both ends become single-slice tangles differing at slice `at`.
        let outer = if remove { real_slices(cv, lt) } else { real_slices(cu, ls) };
        let with = |f: FlatSlice| {
            let mut sl = outer.clone();
            sl.insert(at, f);
            FlatTangle::new(k, sl).and_then(|t| t.configuration())
        };
        let (id_conf, tb_conf) = (with(FlatSlice::Id)?, with(FlatSlice::Turnback(i - 1))?);
        let (ms, mt) = if remove { (tb_conf, id_conf) } else { (id_conf, tb_conf) };
        let (m_rem, m_ins) = if remove { (2, 1) } else { (0, 1) };
        let into = outside_map(&cu.tangle, &ms.tangle, ls, at, m_rem, m_ins);
        let cm_in = circle_map(cu, &ms, &into);
        let (o_rem, o_ins) = if remove { (1, 0) } else { (1, 2) };
        let out = outside_map(&mt.tangle, &cv.tangle, mt.tangle.len(), at, o_rem, o_ins);
        let cm_out = circle_map(&mt, cv, &out);
        let site = site_at(&ms, 0, at, i - 1);
        let sm = eval_saddle(&ms, &site, scheme)?;
        let xin = transport(x, &cm_in);
        let pre = nu(&ms, scheme) - nu(cu, scheme);
        let post = nu(cv, scheme) - nu(&mt, scheme);
        Ok(sm
            .matrix
            .column(xin)
            .iter()
            .map(|(z, c)| (u, transport(*z, &cm_out), c.shift(pre + post)))
            .collect())
    })
}

/// Sequential Gaussian elimination on unit entries of a differential,
/// tracking the two homotopy equivalences with the reduced complex.
struct Reduction {
    ring: Ring,
    cols: Vec<BTreeMap<usize, Laurent>>,
    rows: Vec<BTreeMap<usize, Laurent>>,
    alive: Vec<bool>,
    /// Projection C -> C_red: image of each original generator.
    f: Vec<BTreeMap<usize, Laurent>>,
    /// Which original generators have a given survivor in their f-image.
    f_rev: Vec<BTreeSet<usize>>,
    /// Inclusion C_red -> C: image of each survivor.
    g: Vec<BTreeMap<usize, Laurent>>,
}

impl Reduction {
    fn new(d: &LMatrix, ring: Ring) -> Self {
        let n = d.cols;
        let mut cols = vec![BTreeMap::new(); n];
        let mut rows = vec![BTreeMap::new(); n];
        for (i, j, v) in d.entries() {
            cols[j].insert(i, v.clone());
            rows[i].insert(j, v.clone());
        }
        let unit = |i: usize| BTreeMap::from([(i, Laurent::one())]);
        Self {
            ring,
            cols,
            rows,
            alive: vec![true; n],
            f: (0..n).map(unit).collect(),
            f_rev: (0..n).map(|i| BTreeSet::from([i])).collect(),
            g: (0..n).map(unit).collect(),
        }
    }

    fn add_entry(&mut self, i: usize, j: usize, v: &Laurent) {
        let ring = self.ring;
        let e = self.cols[j].entry(i).or_default();
        *e = ring.normalize(&(&*e + v));
        if e.is_zero() {
            self.cols[j].remove(&i);
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, e.clone());
        }
    }

    /// Cancel `x` against `y` along the unit entry d(y, x).
    fn eliminate(&mut self, x: usize, y: usize) -> Result<()> {
        let ring = self.ring;
        let e = self.cols[x].get(&y).cloned().unwrap_or_default();
        let e_inv = unit_inverse(&e, ring)?;
        let col_x: Vec<(usize, Laurent)> = self.cols[x].iter().filter(|(w, _)| **w != y).map(|(w, v)| (*w, v.clone())).collect();
        let row_y: Vec<(usize, Laurent)> = self.rows[y].iter().filter(|(z, _)| **z != x).map(|(z, v)| (*z, v.clone())).collect();
        for (w, a) in &col_x {
            let ae = a * &e_inv;
            for (z, b) in &row_y {
                self.add_entry(*w, *z, &-(&ae * b));
            }
        }
        // f: x goes to 0, y goes to -e^{-1} (d x restricted to the rest).
        let touched: Vec<usize> = self.f_rev[x].union(&self.f_rev[y]).copied().collect();
        for o in touched {
            let cy = self.f[o].remove(&y);
            self.f[o].remove(&x);
            if let Some(cy) = cy {
                for (w, a) in &col_x {
                    let term = ring.normalize(&-(&(&cy * &e_inv) * a));
                    let ent = self.f[o].entry(*w).or_default();
                    *ent = ring.normalize(&(&*ent + &term));
                    if ent.is_zero() {
                        self.f[o].remove(w);
                        self.f_rev[*w].remove(&o);
                    } else {
                        self.f_rev[*w].insert(o);
                    }
                }
            }
        }
        // g: each z with d(y, z) != 0 picks up -e^{-1} d(y, z) g(x).
        let gx = std::mem::take(&mut self.g[x]);
        for (z, b) in &row_y {
            let s = ring.normalize(&-(&e_inv * b));
            for (o, c) in &gx {
                let ent = self.g[*z].entry(*o).or_default();
                *ent = ring.normalize(&(&*ent + &(&s * c)));
                if ent.is_zero() {
                    self.g[*z].remove(o);
                }
            }
        }
        self.g[y].clear();
        for v in [x, y] {
            self.alive[v] = false;
            for (i, _) in std::mem::take(&mut self.cols[v]) {
                self.rows[i].remove(&v);
            }
            for (j, _) in std::mem::take(&mut self.rows[v]) {
                self.cols[j].remove(&v);
            }
        }
        Ok(())
    }
}

/// Which Reidemeister move a reduction undoes, with the index of its first crossing.
struct ReidemeisterBlock {
    at: usize,
    len: usize,
    first_crossing: usize,
    n_new: usize,
}

impl ReidemeisterBlock {
    fn of(big: &TangleWord, at: usize, len: usize) -> Self {
        let first_crossing = big.slices[..at].iter().filter(|s| matches!(s, Slice::Crossing { .. })).count();
        let n_new = big.slices[at..at + len].iter().filter(|s| matches!(s, Slice::Crossing { .. })).count();
        Self { at, len, first_crossing, n_new }
    }

    fn small_vertex(&self, u: usize) -> usize {
        let lo = u & ((1 << self.first_crossing) - 1);
        let hi = u >> (self.first_crossing + self.n_new);
        lo | hi << self.first_crossing
    }

    fn big_vertex(&self, u: usize, bits: usize) -> usize {
        let lo = u & ((1 << self.first_crossing) - 1);
        let hi = u >> self.first_crossing;
        lo | bits << self.first_crossing | hi << (self.first_crossing + self.n_new)
    }
}

/// Homotopy equivalence data between C(big) and C(small) for a Reidemeister block of `big`.
struct ReidemeisterData {
    /// C(small) -> C(big)
    into_big: LMatrix,
    /// C(big) -> C(small)
    onto_small: LMatrix,
}

fn reidemeister_data(big: &CubeComplex, small: &CubeComplex, blk: &ReidemeisterBlock) -> Result<ReidemeisterData> {
    let ring = big.ring;
    let ob = offsets(big);
    let os = offsets(small);
    let d = total_differential(big);
    let mut red = Reduction::new(&d, ring);
    let signs: Vec<i8> = big.word.crossing_signs()[blk.first_crossing..blk.first_crossing + blk.n_new].to_vec();
    let small_verts = small.vertices.len();
    let same_outside = |a: usize, b: usize| -> Vec<Option<usize>> {
        let (ca, cb) = (&big.vertices[a].conf, &big.vertices[b].conf);
        let (ta, tb) = (&ca.tangle, &cb.tangle);
        let map = |n: usize| {
            let (lv, j) = ta.node_pos(n);
            (lv <= blk.at || lv >= blk.at + blk.len).then(|| tb.node(lv, j))
        };
        circle_map(ca, cb, &map)
    };
    let internal = |v: usize| -> Result<usize> {
        let c = &big.vertices[v].conf;
        let t = &c.tangle;
        let inside = |n: &usize| {
            let lv = t.node_pos(*n).0;
            lv > blk.at && lv < blk.at + blk.len
        };
        (0..c.circles.len())
            .find(|&i| c.circles[i].nodes.iter().all(inside))
            .ok_or_else(|| Error::Topology("expected a small circle inside the move".into()))
    };
    // Pairs (x, y): cancel the generator x against its partner y = partner(x).
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let (keep_bits, keep_label): (usize, Option<bool>);
    if blk.n_new == 1 {
        // Kink: the Id smoothing carries the small circle.
        let circ = usize::from(signs[0] < 0);
        let other = 1 - circ;
        for u in 0..small_verts {
            let a = blk.big_vertex(u, circ);
            let b = blk.big_vertex(u, other);
            let sc = internal(a)?;
            let cm = same_outside(a, b);
            let (from, to) = if signs[0] > 0 { (a, b) } else { (b, a) };
            for g in 0..big.vertices[a].rank() {
                let minus = g >> sc & 1 == 1;
                let partner = ob[b] + transport(g, &cm);
                if signs[0] > 0 && !minus {
                    pairs.push((ob[from] + g, partner));
                } else if signs[0] < 0 && minus {
                    pairs.push((partner, ob[to] + g));
                }
            }
        }
        keep_bits = circ;
        keep_label = Some(signs[0] > 0);
    } else {
        let s = signs[0];
        let circ = usize::from(s > 0) | usize::from(s < 0) << 1;
        let par = 3 - circ;
        for u in 0..small_verts {
            let (v00, vc, v11) = (blk.big_vertex(u, 0), blk.big_vertex(u, circ), blk.big_vertex(u, 3));
            let sc = internal(vc)?;
            let to00 = same_outside(vc, v00);
            let to11 = same_outside(vc, v11);
            for g in 0..big.vertices[vc].rank() {
                if g >> sc & 1 == 1 {
                    pairs.push((ob[v00] + transport(g, &to00), ob[vc] + g));
                }
            }
            for g in 0..big.vertices[vc].rank() {
                if g >> sc & 1 == 0 {
                    pairs.push((ob[vc] + g, ob[v11] + transport(g, &to11)));
                }
            }
        }
        keep_bits = par;
        keep_label = None;
    }
    for (x, y) in pairs {
        red.eliminate(x, y)?;
    }

    // Identify survivors with generators of the small complex.
    let mut psi: BTreeMap<usize, usize> = BTreeMap::new();
    for u in 0..small_verts {
        let bv = blk.big_vertex(u, keep_bits);
        debug_assert_eq!(blk.small_vertex(bv), u);
        let (cb, cs) = (&big.vertices[bv].conf, &small.vertices[u].conf);
        let map = outside_map(&cb.tangle, &cs.tangle, big.word.slices.len(), blk.at, blk.len, 0);
        let cm = circle_map(cb, cs, &map);
        let sc = cm.iter().position(|c| c.is_none());
        for g in 0..big.vertices[bv].rank() {
            let id = ob[bv] + g;
            if !red.alive[id] {
                continue;
            }
            if let (Some(sc), Some(keep_minus)) = (sc, keep_label) {
                if (g >> sc & 1 == 1) != keep_minus {
                    return Err(Error::Calibration("survivor carries the wrong small-circle label".into()));
                }
            }
            psi.insert(id, os[u] + transport(g, &cm));
        }
    }
    let n_small = os[small_verts];
    if psi.len() != n_small || red.alive.iter().filter(|&&a| a).count() != n_small {
        return Err(Error::Calibration("reduced complex has the wrong rank".into()));
    }
    let ds = total_differential(small);
    let inv_psi: BTreeMap<usize, usize> = psi.iter().map(|(&a, &b)| (b, a)).collect();
    // Diagonal rescaling lambda with psi . d_red = d_small . psi.
    let mut lambda: BTreeMap<usize, Laurent> = BTreeMap::new();
    let mut adj: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    for &s in psi.keys() {
        for &t in red.cols[s].keys() {
            adj.entry(s).or_default().push((t, true));
            adj.entry(t).or_default().push((s, false));
        }
    }
    for &root in psi.keys() {
        if lambda.contains_key(&root) {
            continue;
        }
        lambda.insert(root, Laurent::one());
        let mut stack = vec![root];
        while let Some(a) = stack.pop() {
            for &(b, forward) in adj.get(&a).map(|v| v.as_slice()).unwrap_or(&[]) {
                if lambda.contains_key(&b) {
                    continue;
                }
                let (src, dst) = if forward { (a, b) } else { (b, a) };
                let dr = red.cols[src].get(&dst).cloned().unwrap_or_default();
                let dsm = ring.normalize(&ds.get(psi[&dst], psi[&src]));
                let la = lambda[&a].clone();
                // lambda(dst) d_red(dst, src) = d_small(dst, src) lambda(src)
                let lb = if forward {
                    ring.normalize(&(&(&dsm * &la) * &unit_inverse(&dr, ring)?))
                } else {
                    ring.normalize(&(&(&dr * &la) * &unit_inverse(&dsm, ring)?))
                };
                lambda.insert(b, lb);
                stack.push(b);
            }
        }
    }
    for (&s, &ps) in &psi {
        for (&t, v) in &red.cols[s] {
            let lhs = ring.normalize(&(&lambda[&t] * v));
            let rhs = ring.normalize(&(&ds.get(psi[&t], ps) * &lambda[&s]));
            if lhs != rhs {
                return Err(Error::Calibration("reduced differential differs from the simplified diagram".into()));
            }
        }
        for (i, w) in ds.column(ps) {
            if !w.is_zero() && !red.cols[s].contains_key(&inv_psi[i]) {
                return Err(Error::Calibration("reduced differential misses an entry".into()));
            }
        }
    }
    let nb = ob[big.vertices.len()];
    let mut into_cols = Vec::with_capacity(n_small);
    for y in 0..n_small {
        let s = inv_psi[&y];
        let li = unit_inverse(&lambda[&s], ring)?;
        into_cols.push(red.g[s].iter().map(|(&o, c)| (o, ring.normalize(&(c * &li)))).collect());
    }
    let mut onto_cols = Vec::with_capacity(nb);
    for o in 0..nb {
        onto_cols.push(red.f[o].iter().map(|(&s, c)| (psi[&s], ring.normalize(&(c * &lambda[&s])))).collect());
    }
    Ok(ReidemeisterData { into_big: LMatrix::from_columns(nb, into_cols), onto_small: LMatrix::from_columns(n_small, onto_cols) })
}

/// Chain map of one elementary cobordism over k_r (r = 0: Laurent polynomials).
pub fn elementary_map(e: &ElementaryCobordism, r: u32, scheme: &WeightScheme) -> Result<ChainMap> {
    let s = build_complex(&e.source, r, scheme)?;
    let t = build_complex(&e.target, r, scheme)?;
    let ring = s.ring;
    let m = match e.mv {
        Move::SeamSlideArc { direction: SeamDirection::Up } => slide_up(&s, &t, scheme)?,
        Move::SeamSlideCrossing { variant } if variant.direction() == SeamDirection::Up => slide_up(&s, &t, scheme)?,
        Move::SeamSlideArc { direction: SeamDirection::Down } | Move::SeamSlideCrossing { .. } => {
            invert_monomial(&slide_up(&t, &s, scheme)?.map_entries(|x| ring.normalize(x)), ring)?
        }
        Move::Birth { slice, .. } => birth_map(&s, &t, slice, scheme)?,
        Move::Death { slice, dotted } => death_map(&s, &t, slice, dotted, scheme)?,
        Move::SaddleMove { slice, i, remove } => saddle_map(&s, &t, slice, i, remove, scheme)?,
        Move::R1 { slice, .. } => reidemeister_data(&t, &s, &ReidemeisterBlock::of(&t.word, slice, 3))?.into_big,
        Move::R2 { slice, .. } => reidemeister_data(&t, &s, &ReidemeisterBlock::of(&t.word, slice, 2))?.into_big,
        Move::R1inv { slice } => reidemeister_data(&s, &t, &ReidemeisterBlock::of(&s.word, slice, 3))?.onto_small,
        Move::R2inv { slice } => reidemeister_data(&s, &t, &ReidemeisterBlock::of(&s.word, slice, 2))?.onto_small,
    };
    ChainMap::new(s, t, m)
}

/// Matrix product of the elementary maps; the empty movie is the identity of the empty diagram.
pub fn compose_movie(movie: &[ElementaryCobordism], r: u32, scheme: &WeightScheme) -> Result<ChainMap> {
    for (k, pair) in movie.windows(2).enumerate() {
        let (a, b) = (&pair[0].target, &pair[1].source);
        if a.k != b.k || a.slices != b.slices {
            return Err(Error::Glue(format!("step {} ends at {} but step {} starts at {}", k, a.to_json(), k + 1, b.to_json())));
        }
    }
    let Some(first) = movie.first() else {
        let empty = TangleWord::new(0, r, vec![])?;
        return Ok(ChainMap::identity(&build_complex(&empty, r, scheme)?));
    };
    let mut acc = elementary_map(first, r, scheme)?;
    for e in &movie[1..] {
        acc = acc.then(&elementary_map(e, r, scheme)?)?;
    }
    Ok(acc)
}

/// Build the moves of a movie one after another from a starting word.
pub fn chain_moves(start: &TangleWord, moves: &[Move]) -> Result<Vec<ElementaryCobordism>> {
    let mut cur = start.clone();
    let mut out = Vec::with_capacity(moves.len());
    for &mv in moves {
        let e = ElementaryCobordism::new(&cur, mv)?;
        cur = e.target.clone();
        out.push(e);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct RawMovie {
    source: serde_json::Value,
    moves: Vec<serde_json::Value>,
}

/// Parse `{"source": <word>, "moves": [{"move": "Birth", ...}, ...]}`.
pub fn parse_movie(text: &str) -> Result<Vec<ElementaryCobordism>> {
    let raw: RawMovie = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let start = TangleWord::parse(&raw.source.to_string())?;
    let mut moves = Vec::with_capacity(raw.moves.len());
    for m in raw.moves {
        if m.get("move").and_then(|t| t.as_str()) == Some("R3") {
            return Err(Error::Location("Reidemeister III moves are not supported".into()));
        }
        moves.push(serde_json::from_value::<Move>(m).map_err(|e| Error::Schema(e.to_string()))?);
    }
    chain_moves(&start, &moves)
}

pub fn movie_to_json(movie: &[ElementaryCobordism]) -> String {
    let source = movie.first().map(|e| e.source.to_json()).unwrap_or_else(|| r#"{"k":0,"r":0,"slices":[]}"#.into());
    let moves: Vec<String> = movie.iter().map(|e| serde_json::to_string(&e.mv).expect("move serialization")).collect();
    format!(r#"{{"source":{source},"moves":[{}]}}"#, moves.join(","))
}

/// Number of components if `w` is a crossingless diagram of an unlink in a disk, else `None`.
fn unlink_components(w: &TangleWord) -> Result<Option<usize>> {
    if w.k != 0 || w.crossing_count() > 0 {
        return Ok(None);
    }
    let conf = w.resolve(&[]).tangle.configuration()?;
    Ok(Some(conf.circles.len()))
}

/// The sweep S^1 x L of an unlink as a movie from the empty diagram to itself.
///
/// The m circles are born side by side, each pushed once through the seam,
/// split into two essential circles, merged back, pushed back and capped off.
pub fn sweep_movie(link: &TangleWord) -> Result<Vec<ElementaryCobordism>> {
    let m = unlink_components(link)?.ok_or_else(|| {
        Error::UnsupportedLink(format!("sweeps are implemented for crossingless unlinks only, got {}", link.to_json()))
    })?;
    let mut moves = Vec::new();
    for j in 0..m {
        moves.push(Move::Birth { slice: j, i: 2 * j + 1 });
    }
    for _ in 0..m {
        moves.push(Move::SeamSlideArc { direction: SeamDirection::Up });
    }
    // Now [cap(2m-1) .. cap(1), cup(1) .. cup(2m-1)] on 2m strands.
    for j in 0..m {
        moves.push(Move::SaddleMove { slice: m - 1 - j, i: 2 * j + 1, remove: true });
    }
    for j in (0..m).rev() {
        moves.push(Move::SaddleMove { slice: m - 1 - j, i: 2 * j + 1, remove: false });
    }
    for _ in 0..m {
        moves.push(Move::SeamSlideArc { direction: SeamDirection::Down });
    }
    for j in (0..m).rev() {
        moves.push(Move::Death { slice: j, dotted: false });
    }
    chain_moves(&TangleWord::new(0, link.r, vec![])?, &moves)
}

/// Crossingless planar diagram of the m-component unlink.
pub fn unlink_word(m: usize, r: u32) -> TangleWord {
    let slices = (0..m).flat_map(|_| [Slice::Cup { i: 1 }, Slice::Cap { i: 1 }]).collect();
    TangleWord::new(0, r, slices).expect("unlink word")
}

/// Write `value` as `sign * q^c * (q + q^-1)^m` in the ring, if possible.
pub fn match_jones_power(value: &Laurent, m: u32, ring: Ring) -> Option<(i64, i64)> {
    let base = (0..m).fold(Laurent::one(), |acc, _| &acc * &Laurent::from_terms([(1, 1), (-1, 1)]));
    let target = ring.normalize(value);
    let range: Vec<i64> = match ring {
        Ring::Cyclotomic(r) => (0..r as i64).collect(),
        Ring::Integer => vec![0],
        Ring::Laurent => {
            let lo = value.min_exp().unwrap_or(0) - base.min_exp().unwrap_or(0);
            vec![lo]
        }
    };
    for c in range {
        for sign in [1, -1] {
            if ring.normalize(&base.shift(c).scale(sign)) == target {
                return Some((sign, c));
            }
        }
    }
    None
}
