//! Tangle words, their smoothings and the curve systems of their annular closures.
//!
//! A word presents a (k,k)-tangle cut open along the seam. Internally a smoothed
//! word becomes a [`FlatTangle`] whose nodes sit on levels 0..=L, one level
//! between consecutive slices, so that smoothings of the same word share nodes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One elementary slice of a tangle word; positions are 1-based as in the JSON form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slice {
    Crossing { i: usize, sign: i8 },
    Cup { i: usize },
    Cap { i: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlice {
    t: String,
    i: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWord {
    k: i64,
    r: i64,
    slices: Vec<RawSlice>,
}

/// Closure of a tangle word in the annulus, together with the modulus r.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TangleWord {
    pub k: usize,
    pub r: u32,
    pub slices: Vec<Slice>,
}

impl TangleWord {
    pub fn new(k: usize, r: u32, slices: Vec<Slice>) -> Result<Self> {
        let w = Self { k, r, slices };
        w.validate()?;
        Ok(w)
    }

    /// Closure of a braid-like word of crossings on k strands.
    pub fn braid(k: usize, r: u32, crossings: &[(usize, i8)]) -> Result<Self> {
        Self::new(k, r, crossings.iter().map(|&(i, sign)| Slice::Crossing { i, sign }).collect())
    }

    pub fn with_r(&self, r: u32) -> Self {
        Self { r, ..self.clone() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawWord = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if raw.k < 0 {
            return Err(Error::Schema(format!("k must be non-negative, got {}", raw.k)));
        }
        if raw.r < 0 || raw.r > u32::MAX as i64 {
            return Err(Error::Schema(format!("r must be a non-negative integer, got {}", raw.r)));
        }
        let mut slices = Vec::with_capacity(raw.slices.len());
        for (idx, s) in raw.slices.iter().enumerate() {
            let pos = |i: i64| -> Result<usize> {
                if i < 1 {
                    Err(Error::Range { slice: idx, pos: i, lo: 1, hi: i64::MAX })
                } else {
                    Ok(i as usize)
                }
            };
            let slice = match (s.t.as_str(), s.s) {
                ("x", Some(sign)) if sign == 1 || sign == -1 => {
                    Slice::Crossing { i: pos(s.i)?, sign: sign as i8 }
                }
                ("x", Some(sign)) => {
                    return Err(Error::Schema(format!("slice {idx}: crossing sign must be ±1, got {sign}")))
                }
                ("x", None) => return Err(Error::Schema(format!("slice {idx}: crossing without sign"))),
                ("cup", None) => Slice::Cup { i: pos(s.i)? },
                ("cap", None) => Slice::Cap { i: pos(s.i)? },
                ("cup" | "cap", Some(_)) => {
                    return Err(Error::Schema(format!("slice {idx}: cup/cap slices take no sign")))
                }
                (t, _) => return Err(Error::Schema(format!("slice {idx}: unknown slice type {t:?}"))),
            };
            slices.push(slice);
        }
        Self::new(raw.k as usize, raw.r as u32, slices)
    }

    pub fn to_json(&self) -> String {
        let raw = RawWord {
            k: self.k as i64,
            r: self.r as i64,
            slices: self
                .slices
                .iter()
                .map(|s| match *s {
                    Slice::Crossing { i, sign } => RawSlice { t: "x".into(), i: i as i64, s: Some(sign as i64) },
                    Slice::Cup { i } => RawSlice { t: "cup".into(), i: i as i64, s: None },
                    Slice::Cap { i } => RawSlice { t: "cap".into(), i: i as i64, s: None },
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("word serialization")
    }

    /// Strand counts at levels 0..=L.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.k];
        let mut m = self.k;
        for s in &self.slices {
            match s {
                Slice::Cup { .. } => m += 2,
                Slice::Cap { .. } => m = m.saturating_sub(2),
                Slice::Crossing { .. } => {}
            }
            w.push(m);
        }
        w
    }

    pub fn validate(&self) -> Result<()> {
        let mut m = self.k as i64;
        for (idx, s) in self.slices.iter().enumerate() {
            match *s {
                Slice::Crossing { i, sign } => {
                    if sign != 1 && sign != -1 {
                        return Err(Error::Schema(format!("slice {idx}: crossing sign must be ±1")));
                    }
                    check_range(idx, i, 1, m - 1)?;
                }
                Slice::Cup { i } => {
                    check_range(idx, i, 1, m + 1)?;
                    m += 2;
                }
                Slice::Cap { i } => {
                    if m < 2 {
                        return Err(Error::Balance { slice: idx, detail: format!("cap on {m} strands") });
                    }
                    check_range(idx, i, 1, m - 1)?;
                    m -= 2;
                }
            }
        }
        if m != self.k as i64 {
            return Err(Error::Balance {
                slice: self.slices.len(),
                detail: format!("final strand count {m} differs from k = {}", self.k),
            });
        }
        Ok(())
    }

    pub fn crossing_count(&self) -> usize {
        self.slices.iter().filter(|s| matches!(s, Slice::Crossing { .. })).count()
    }

    /// Slice indices of the crossings, in word order.
    pub fn crossing_slices(&self) -> Vec<usize> {
        self.slices
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Slice::Crossing { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn crossing_signs(&self) -> Vec<i8> {
        self.slices
            .iter()
            .filter_map(|s| match s {
                Slice::Crossing { sign, .. } => Some(*sign),
                _ => None,
            })
            .collect()
    }

    pub fn grading(&self) -> GradingData {
        let signs = self.crossing_signs();
        GradingData {
            n_plus: signs.iter().filter(|&&s| s > 0).count(),
            n_minus: signs.iter().filter(|&&s| s < 0).count(),
        }
    }

    /// Replace every crossing by its u_i-smoothing.
    pub fn resolve(&self, u: &[bool]) -> Resolution {
        assert_eq!(u.len(), self.crossing_count(), "resolution length");
        let mut flat = Vec::with_capacity(self.slices.len());
        let mut c = 0;
        for s in &self.slices {
            flat.push(match *s {
                Slice::Cup { i } => FlatSlice::Cup(i - 1),
                Slice::Cap { i } => FlatSlice::Cap(i - 1),
                Slice::Crossing { i, sign } => {
                    let turnback = (sign > 0) == u[c];
                    c += 1;
                    if turnback {
                        FlatSlice::Turnback(i - 1)
                    } else {
                        FlatSlice::Id
                    }
                }
            });
        }
        Resolution {
            u: u.to_vec(),
            tangle: FlatTangle::new(self.k, flat).expect("smoothing of a valid word"),
        }
    }
}

fn check_range(slice: usize, i: usize, lo: i64, hi: i64) -> Result<()> {
    let p = i as i64;
    if p < lo || p > hi {
        Err(Error::Range { slice, pos: p, lo, hi })
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradingData {
    pub n_plus: usize,
    pub n_minus: usize,
}

impl GradingData {
    pub fn homological(&self, weight: usize) -> i64 {
        weight as i64 - self.n_minus as i64
    }

    pub fn quantum_shift(&self, weight: usize) -> i64 {
        weight as i64 + self.n_plus as i64 - 2 * self.n_minus as i64
    }
}

/// Flat slice with 0-based positions. `Turnback(i)` is Cap(i) followed by Cup(i)
/// squeezed into one slice so that smoothings of a crossing keep levels aligned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlatSlice {
    Id,
    Cup(usize),
    Cap(usize),
    Turnback(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlatTangle {
    pub k: usize,
    pub slices: Vec<FlatSlice>,
    widths: Vec<usize>,
    offsets: Vec<usize>,
}

/// Where the strand leaving a boundary node ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Bottom(usize),
    Top(usize),
}

/// Boundary pattern of a flat tangle: pairing of its endpoints and its closed loops.
#[derive(Clone, Debug)]
pub struct Boundary {
    pub bottom: Vec<End>,
    pub top: Vec<End>,
    /// (bottom position, top position) of through strands, sorted by bottom position.
    pub through: Vec<(usize, usize)>,
    pub closed: Vec<Vec<usize>>,
}

impl FlatTangle {
    /// An empty slice list is padded with one identity slice so top and bottom nodes differ.
    pub fn new(k: usize, mut slices: Vec<FlatSlice>) -> Result<Self> {
        if slices.is_empty() {
            slices.push(FlatSlice::Id);
        }
        let mut widths = vec![k];
        let mut m = k;
        for (idx, s) in slices.iter().enumerate() {
            match *s {
                FlatSlice::Id => {}
                FlatSlice::Cup(i) => {
                    if i > m {
                        return Err(Error::Range { slice: idx, pos: i as i64 + 1, lo: 1, hi: m as i64 + 1 });
                    }
                    m += 2;
                }
                FlatSlice::Cap(i) | FlatSlice::Turnback(i) => {
                    if m < 2 || i + 1 >= m {
                        return Err(Error::Range { slice: idx, pos: i as i64 + 1, lo: 1, hi: m as i64 - 1 });
                    }
                    if matches!(s, FlatSlice::Cap(_)) {
                        m -= 2;
                    }
                }
            }
            widths.push(m);
        }
        if m != k {
            return Err(Error::Balance { slice: slices.len(), detail: format!("final width {m} != {k}") });
        }
        let mut offsets = Vec::with_capacity(widths.len() + 1);
        let mut acc = 0;
        for w in &widths {
            offsets.push(acc);
            acc += w;
        }
        offsets.push(acc);
        Ok(Self { k, slices, widths, offsets })
    }

    /// Number of slices; levels run 0..=L.
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn width(&self, level: usize) -> usize {
        self.widths[level]
    }

    pub fn n_nodes(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn node(&self, level: usize, pos: usize) -> usize {
        debug_assert!(pos < self.widths[level]);
        self.offsets[level] + pos
    }

    pub fn node_pos(&self, id: usize) -> (usize, usize) {
        let level = self.offsets.partition_point(|&o| o <= id) - 1;
        (level, id - self.offsets[level])
    }

    /// Edges drawn inside slice `l`, as node pairs.
    pub fn slice_edges(&self, l: usize) -> Vec<(usize, usize)> {
        let m = self.widths[l];
        let lo = |j| self.node(l, j);
        let hi = |j| self.node(l + 1, j);
        let mut e = Vec::new();
        match self.slices[l] {
            FlatSlice::Id => e.extend((0..m).map(|j| (lo(j), hi(j)))),
            FlatSlice::Cup(i) => {
                e.extend((0..m).map(|j| (lo(j), hi(if j < i { j } else { j + 2 }))));
                e.push((hi(i), hi(i + 1)));
            }
            FlatSlice::Cap(i) => {
                e.push((lo(i), lo(i + 1)));
                e.extend((0..m).filter(|&j| j != i && j != i + 1).map(|j| (lo(j), hi(if j < i { j } else { j - 2 }))));
            }
            FlatSlice::Turnback(i) => {
                e.push((lo(i), lo(i + 1)));
                e.push((hi(i), hi(i + 1)));
                e.extend((0..m).filter(|&j| j != i && j != i + 1).map(|j| (lo(j), hi(j))));
            }
        }
        e
    }

    /// All edges of the tangle, tagged with their slice.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        (0..self.len()).flat_map(|l| self.slice_edges(l).into_iter().map(move |(a, b)| (l, a, b))).collect()
    }

    pub fn boundary(&self) -> Boundary {
        let edges = self.edges();
        let mut inc = vec![Vec::new(); self.n_nodes()];
        for (id, &(_, a, b)) in edges.iter().enumerate() {
            inc[a].push(id);
            inc[b].push(id);
        }
        let l = self.len();
        let mut seen = vec![false; self.n_nodes()];
        // follow edges from `start` until a boundary node or back to `start`
        let walk = |start: usize, seen: &mut Vec<bool>| -> Vec<usize> {
            let mut path = vec![start];
            seen[start] = true;
            let mut cur = start;
            let mut via = inc[start][0];
            loop {
                let (_, a, b) = edges[via];
                cur = if a == cur { b } else { a };
                if cur == start {
                    return path;
                }
                seen[cur] = true;
                path.push(cur);
                if inc[cur].len() == 1 {
                    return path;
                }
                via = if inc[cur][0] == via { inc[cur][1] } else { inc[cur][0] };
            }
        };
        let end_of = |id: usize| -> End {
            let (lv, p) = self.node_pos(id);
            if lv == 0 {
                End::Bottom(p)
            } else {
                debug_assert_eq!(lv, l);
                End::Top(p)
            }
        };
        let bottom: Vec<End> =
            (0..self.k).map(|j| end_of(*walk(self.node(0, j), &mut seen).last().unwrap())).collect();
        let top: Vec<End> =
            (0..self.k).map(|j| end_of(*walk(self.node(l, j), &mut seen).last().unwrap())).collect();
        let through = bottom
            .iter()
            .enumerate()
            .filter_map(|(j, e)| match *e {
                End::Top(t) => Some((j, t)),
                End::Bottom(_) => None,
            })
            .collect();
        let mut closed = Vec::new();
        for s in 0..self.n_nodes() {
            if !seen[s] {
                closed.push(walk(s, &mut seen));
            }
        }
        Boundary { bottom, top, through, closed }
    }

    /// Trace the closed curve system of the annular closure.
    pub fn configuration(&self) -> Result<Configuration> {
        Configuration::trace(self.clone())
    }
}

/// A smoothing of a tangle word.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub u: Vec<bool>,
    pub tangle: FlatTangle,
}

impl Resolution {
    /// The smoothing written as a crossingless word (turnbacks become Cap·Cup).
    pub fn flat_word(&self) -> Vec<Slice> {
        let mut out = Vec::new();
        for s in &self.tangle.slices {
            match *s {
                FlatSlice::Id => {}
                FlatSlice::Cup(i) => out.push(Slice::Cup { i: i + 1 }),
                FlatSlice::Cap(i) => out.push(Slice::Cap { i: i + 1 }),
                FlatSlice::Turnback(i) => {
                    out.push(Slice::Cap { i: i + 1 });
                    out.push(Slice::Cup { i: i + 1 });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circle {
    /// Nodes in traversal order.
    pub nodes: Vec<usize>,
    /// (seam point, direction) in traversal order; +1 means crossing from the top level to level 0.
    pub seam_passes: Vec<(usize, i8)>,
    pub winding: i32,
    pub essential: bool,
}

impl Circle {
    pub fn seam_free(&self) -> bool {
        self.seam_passes.is_empty()
    }

    pub fn min_seam_point(&self) -> Option<usize> {
        self.seam_passes.iter().map(|p| p.0).min()
    }
}

/// Closed curve system: essential circles first (innermost first), then trivial ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub tangle: FlatTangle,
    pub circles: Vec<Circle>,
    pub n_essential: usize,
    node_circle: Vec<usize>,
}

impl Configuration {
    pub fn trace(tangle: FlatTangle) -> Result<Self> {
        let n = tangle.n_nodes();
        let l = tangle.len();
        // edge list: tangle edges, then seam edges (top j -> bottom j)
        let mut edges: Vec<(usize, usize, Option<usize>)> =
            tangle.edges().into_iter().map(|(_, a, b)| (a, b, None)).collect();
        for j in 0..tangle.k {
            edges.push((tangle.node(l, j), tangle.node(0, j), Some(j)));
        }
        let mut inc = vec![Vec::new(); n];
        for (id, &(a, b, _)) in edges.iter().enumerate() {
            inc[a].push(id);
            inc[b].push(id);
        }
        if let Some(bad) = inc.iter().position(|v| v.len() != 2) {
            return Err(Error::Topology(format!("node {bad} has degree {}", inc[bad].len())));
        }
        let mut node_seen = vec![false; n];
        let mut raw = Vec::new();
        for start in 0..n {
            if node_seen[start] {
                continue;
            }
            let mut nodes = Vec::new();
            let mut passes = Vec::new();
            let mut cur = start;
            let mut via = inc[start][0];
            loop {
                node_seen[cur] = true;
                nodes.push(cur);
                let (a, b, seam) = edges[via];
                let next = if a == cur { b } else { a };
                if let Some(j) = seam {
                    passes.push((j, if cur == a { 1i8 } else { -1i8 }));
                }
                cur = next;
                if cur == start {
                    break;
                }
                if node_seen[cur] {
                    return Err(Error::Topology(format!("curve through node {cur} does not close")));
                }
                via = if inc[cur][0] == via { inc[cur][1] } else { inc[cur][0] };
            }
            let winding: i32 = passes.iter().map(|p| p.1 as i32).sum();
            if winding.abs() > 1 {
                return Err(Error::Topology(format!("circle with winding {winding}")));
            }
            if winding < 0 {
                nodes[1..].reverse();
                passes.reverse();
                for p in passes.iter_mut() {
                    p.1 = -p.1;
                }
            }
            raw.push(Circle { nodes, seam_passes: passes, winding: winding.abs(), essential: winding != 0 });
        }
        let (mut ess, mut triv): (Vec<_>, Vec<_>) = raw.into_iter().partition(|c| c.essential);
        ess.sort_by_key(|c| c.min_seam_point().unwrap());
        triv.sort_by_key(|c| c.nodes.iter().map(|&x| tangle.node_pos(x)).min().unwrap());
        let n_essential = ess.len();
        let circles: Vec<Circle> = ess.into_iter().chain(triv).collect();
        let mut node_circle = vec![0; n];
        for (ci, c) in circles.iter().enumerate() {
            for &x in &c.nodes {
                node_circle[x] = ci;
            }
        }
        Ok(Self { tangle, circles, n_essential, node_circle })
    }

    pub fn n_trivial(&self) -> usize {
        self.circles.len() - self.n_essential
    }

    /// Circle index (essential first) containing a node.
    pub fn circle_of(&self, node: usize) -> usize {
        self.node_circle[node]
    }

    pub fn is_standard(&self) -> bool {
        self.circles.iter().all(|c| c.seam_passes.len() <= 1)
    }

    pub fn total_winding(&self) -> i32 {
        self.circles.iter().map(|c| c.seam_passes.iter().map(|p| p.1 as i32).sum::<i32>()).sum()
    }

    pub fn generator_count(&self) -> usize {
        1 << self.circles.len()
    }
}

/// Surgery arc of a 0-smoothed crossing, anchored on the two strands it joins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurgerySite {
    /// Index of the crossing among the word's crossings.
    pub crossing: usize,
    pub slice: usize,
    /// 0-based left position of the arc.
    pub pos: usize,
    /// (circle, node) anchors: left/bottom strand then right/top strand.
    pub anchors: [(usize, usize); 2],
}

impl SurgerySite {
    pub fn joins_one_circle(&self) -> bool {
        self.anchors[0].0 == self.anchors[1].0
    }
}

/// Sites for all crossings with u_i = 0 on the configuration of `resolve(word, u)`.
pub fn surgery_sites(word: &TangleWord, u: &[bool]) -> Result<Vec<SurgerySite>> {
    let res = word.resolve(u);
    let conf = res.tangle.configuration()?;
    let mut out = Vec::new();
    let mut c = 0;
    for (l, s) in word.slices.iter().enumerate() {
        if let Slice::Crossing { i, .. } = *s {
            if !u[c] {
                out.push(site_at(&conf, c, l, i - 1));
            }
            c += 1;
        }
    }
    Ok(out)
}

/// Site of the crossing at `slice`, left position `pos` (0-based), in its 0-smoothing.
pub fn site_at(conf: &Configuration, crossing: usize, slice: usize, pos: usize) -> SurgerySite {
    let t = &conf.tangle;
    let (a, b) = match t.slices[slice] {
        FlatSlice::Id => (t.node(slice, pos), t.node(slice, pos + 1)),
        FlatSlice::Turnback(i) => {
            debug_assert_eq!(i, pos);
            (t.node(slice, pos), t.node(slice + 1, pos))
        }
        _ => unreachable!("crossing slices smooth to Id or Turnback"),
    };
    SurgerySite { crossing, slice, pos, anchors: [(conf.circle_of(a), a), (conf.circle_of(b), b)] }
}
