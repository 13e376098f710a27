//! The quantum annular TQFT on configurations: generator labels, weight schemes,
//! standardization movies and saddle matrices.
//!
//! A generator of F(C) is the image of a standard generator under the cobordism
//! that slides the seam arcs of C back into place. Saddle maps are evaluated by
//! closing the composite cobordism up along the seam: the cut tangles of source
//! and target are stacked between their standardizing pieces and the resulting
//! surface is evaluated component by component, with the seam loops traced out
//! against weights q^{±1}.

use crate::diagram::{Boundary, Configuration, End, FlatSlice, FlatTangle, SurgerySite};
use crate::error::{Error, Result};
use crate::matrix::LMatrix;
use crate::scalar::Laurent;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Exponent of the trace weight carried by a seam loop labelled `+`.
const TRACE_SIGN: i64 = 1;

/// Per circle: `true` for the `+` label. Essential circles come first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratorLabel {
    pub essential: Vec<bool>,
    pub trivial: Vec<bool>,
}

impl GeneratorLabel {
    /// Bit i of the index is set when circle i carries the `-` label.
    pub fn from_index(idx: usize, n_ess: usize, n_triv: usize) -> Self {
        let bit = |i: usize| idx >> i & 1 == 0;
        Self { essential: (0..n_ess).map(bit).collect(), trivial: (n_ess..n_ess + n_triv).map(bit).collect() }
    }

    pub fn index(&self) -> usize {
        self.essential.iter().chain(&self.trivial).enumerate().map(|(i, &p)| if p { 0 } else { 1 << i }).sum()
    }

    pub fn qdeg(&self) -> i64 {
        self.trivial.iter().map(|&p| if p { 1 } else { -1 }).sum()
    }

    pub fn adeg(&self) -> i64 {
        self.essential.iter().map(|&p| if p { 1 } else { -1 }).sum()
    }
}

impl std::fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self.essential.iter().map(|&p| format!("v{}", if p { '+' } else { '-' })).collect();
        parts.extend(self.trivial.iter().map(|&p| format!("w{}", if p { '+' } else { '-' })));
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("⊗"))
        }
    }
}

pub fn qdeg_of(idx: usize, conf: &Configuration) -> i64 {
    GeneratorLabel::from_index(idx, conf.n_essential, conf.n_trivial()).qdeg()
}

pub fn adeg_of(idx: usize, conf: &Configuration) -> i64 {
    GeneratorLabel::from_index(idx, conf.n_essential, conf.n_trivial()).adeg()
}

/// Arc-slide weights, stored as exponents of the forward weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightScheme {
    #[serde(rename = "wP")]
    pub wp: i64,
    #[serde(rename = "wN")]
    pub wn: i64,
}

/// The scheme returned by `derive_default_scheme`, pinned.
impl Default for WeightScheme {
    fn default() -> Self {
        Self::new(-2, -2)
    }
}

impl WeightScheme {
    pub const DOT_CROSS: i64 = 2;
    pub const SADDLE_CROSS: i64 = 1;

    pub fn new(wp: i64, wn: i64) -> Self {
        Self { wp, wn }
    }

    pub fn p_fwd(&self) -> i64 {
        self.wp
    }

    pub fn p_bwd(&self) -> i64 {
        1 - self.wp
    }

    pub fn n_fwd(&self) -> i64 {
        self.wn
    }

    pub fn n_bwd(&self) -> i64 {
        -1 - self.wn
    }

    pub fn slide_weight(&self, kind: SlideKind, forward: bool) -> i64 {
        match (kind, forward) {
            (SlideKind::P, true) => self.p_fwd(),
            (SlideKind::P, false) => self.p_bwd(),
            (SlideKind::N, true) => self.n_fwd(),
            (SlideKind::N, false) => self.n_bwd(),
        }
    }

    /// Constraint equations: forward times backward is q for P and q^-1 for N.
    pub fn is_consistent(&self) -> bool {
        self.p_fwd() + self.p_bwd() == 1 && self.n_fwd() + self.n_bwd() == -1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scheme serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("weight scheme: {e}")))
    }
}

/// Words on which candidate schemes are calibrated.
pub fn calibration_suite() -> Vec<(&'static str, crate::diagram::TangleWord)> {
    use crate::diagram::{Slice, TangleWord};
    let braid = |c: &[(usize, i8)]| TangleWord::braid(2, 0, c).expect("calibration braid");
    vec![
        ("sigma1^2", braid(&[(1, 1), (1, 1)])),
        ("sigma1^3", braid(&[(1, 1), (1, 1), (1, 1)])),
        (
            "kink",
            TangleWord::new(1, 0, vec![Slice::Cup { i: 2 }, Slice::Crossing { i: 1, sign: 1 }, Slice::Cap { i: 2 }])
                .expect("kink"),
        ),
        ("ladybug3", braid(&[(1, -1), (1, 1), (1, 1)])),
    ]
}

/// Least (wP, wN) with exponents in -2..=2 that is consistent, gives d^2 = 0 on the
/// calibration suite and keeps every essential merge/split coefficient ratio equal to q.
pub fn derive_default_scheme() -> Result<WeightScheme> {
    let suite = calibration_suite();
    for wp in -2..=2 {
        for wn in -2..=2 {
            let s = WeightScheme::new(wp, wn);
            if s.is_consistent() && scheme_passes(&s, &suite)? {
                return Ok(s);
            }
        }
    }
    Err(Error::Calibration("no weight scheme passes the calibration suite".into()))
}

/// d^2 = 0 and the saddle ratio checks for one scheme on the given words.
pub fn scheme_passes(s: &WeightScheme, words: &[(&str, crate::diagram::TangleWord)]) -> Result<bool> {
    for (_, w) in words {
        let c = crate::complex::build_complex(w, 0, s)?;
        if !c.verify_d_squared().is_empty() || !c.saddle_ratio_violations().is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlideKind {
    /// The canceled pair is joined below the seam.
    P,
    /// The canceled pair is joined above the seam.
    N,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MovieEvent {
    ArcSlide { circle: usize, seam_points: (usize, usize), kind: SlideKind, forward: bool },
    Saddle { source: Box<Configuration>, site: SurgerySite },
    CupBirth,
    CapDeath { circle: usize, dotted: bool },
    DotMove { circle: usize, crossings: i64 },
}

/// Events with running circle census (essential count, trivial seam-free flags).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Movie {
    pub n_essential: usize,
    pub trivial_seam_free: Vec<bool>,
    pub events: Vec<MovieEvent>,
}

impl Movie {
    pub fn empty(conf: &Configuration) -> Self {
        Self {
            n_essential: conf.n_essential,
            trivial_seam_free: conf.circles[conf.n_essential..].iter().map(|c| c.seam_free()).collect(),
            events: Vec::new(),
        }
    }

    pub fn slide_counts(&self) -> (usize, usize) {
        let mut p = 0;
        let mut n = 0;
        for e in &self.events {
            if let MovieEvent::ArcSlide { kind, .. } = e {
                match kind {
                    SlideKind::P => p += 1,
                    SlideKind::N => n += 1,
                }
            }
        }
        (p, n)
    }

    /// The movie played backwards; only slide and dot events can be reversed.
    pub fn reverse(&self) -> Movie {
        let events = self
            .events
            .iter()
            .rev()
            .map(|e| match e {
                MovieEvent::ArcSlide { circle, seam_points, kind, forward } => MovieEvent::ArcSlide {
                    circle: *circle,
                    seam_points: *seam_points,
                    kind: *kind,
                    forward: !forward,
                },
                MovieEvent::DotMove { circle, crossings } => MovieEvent::DotMove { circle: *circle, crossings: -crossings },
                other => panic!("event {other:?} has no reverse"),
            })
            .collect();
        Movie { events, ..self.clone() }
    }
}

/// Pairing of the seam points of a configuration into arcs below and above the seam.
#[derive(Clone, Debug)]
struct SeamPattern {
    points: Vec<usize>,
    below: BTreeMap<usize, usize>,
    above: BTreeMap<usize, usize>,
}

fn seam_pattern(b: &Boundary) -> SeamPattern {
    let mut below = BTreeMap::new();
    let mut above = BTreeMap::new();
    for (j, e) in b.bottom.iter().enumerate() {
        if let End::Bottom(j2) = *e {
            below.insert(j, j2);
        }
    }
    for (j, e) in b.top.iter().enumerate() {
        if let End::Top(j2) = *e {
            above.insert(j, j2);
        }
    }
    SeamPattern { points: (0..b.bottom.len()).collect(), below, above }
}

/// Slides that bring `conf` to standard form, innermost adjacent pair first,
/// leftmost first, below-seam pairs before above-seam pairs.
pub fn standardization_movie(conf: &Configuration) -> Movie {
    let b = conf.tangle.boundary();
    let mut pat = seam_pattern(&b);
    let l = conf.tangle.len();
    let mut movie = Movie::empty(conf);
    loop {
        let mut found = None;
        for w in pat.points.windows(2) {
            let (a, c) = (w[0], w[1]);
            if pat.below.get(&a) == Some(&c) {
                found = Some((a, c, SlideKind::P));
                break;
            }
            if pat.above.get(&a) == Some(&c) {
                found = Some((a, c, SlideKind::N));
                break;
            }
        }
        let Some((a, c, kind)) = found else { break };
        let node = conf.tangle.node(if kind == SlideKind::P { 0 } else { l }, a);
        movie.events.push(MovieEvent::ArcSlide { circle: conf.circle_of(node), seam_points: (a, c), kind, forward: true });
        // the slid arc now joins the partners of a and c on the other side directly
        let (this, other) = match kind {
            SlideKind::P => (&mut pat.below, &mut pat.above),
            SlideKind::N => (&mut pat.above, &mut pat.below),
        };
        this.remove(&a);
        this.remove(&c);
        let pa = other.remove(&a);
        let pc = other.remove(&c);
        for p in [pa, pc].into_iter().flatten() {
            other.remove(&p);
        }
        if let (Some(pa), Some(pc)) = (pa, pc) {
            if pa != c {
                other.insert(pa, pc);
                other.insert(pc, pa);
            }
        }
        pat.points.retain(|&x| x != a && x != c);
    }
    movie
}

/// Total slide exponent of the standardization movie under a scheme.
pub fn standardization_weight(conf: &Configuration, scheme: &WeightScheme) -> i64 {
    standardization_movie(conf)
        .events
        .iter()
        .map(|e| match e {
            MovieEvent::ArcSlide { kind, forward, .. } => scheme.slide_weight(*kind, *forward),
            _ => 0,
        })
        .sum()
}

/// Formal sum of generators of the movie's current configuration.
pub type Vector = BTreeMap<GeneratorLabel, Laurent>;

/// Apply a movie to one generator.
pub fn eval_movie(m: &Movie, scheme: &WeightScheme, x: &GeneratorLabel) -> Result<Vector> {
    if x.essential.len() != m.n_essential || x.trivial.len() != m.trivial_seam_free.len() {
        return Err(Error::Domain(format!("label {x} does not fit the movie's source configuration")));
    }
    let mut seam_free = m.trivial_seam_free.clone();
    let mut state: Vector = BTreeMap::from([(x.clone(), Laurent::one())]);
    for ev in &m.events {
        match ev {
            MovieEvent::ArcSlide { kind, forward, .. } => {
                let w = scheme.slide_weight(*kind, *forward);
                state = state.into_iter().map(|(k, v)| (k, v.shift(w))).collect();
            }
            MovieEvent::DotMove { crossings, .. } => {
                let w = WeightScheme::DOT_CROSS * crossings;
                state = state.into_iter().map(|(k, v)| (k, v.shift(w))).collect();
            }
            MovieEvent::CupBirth => {
                seam_free.push(true);
                state = state
                    .into_iter()
                    .map(|(mut k, v)| {
                        k.trivial.push(true);
                        (k, v)
                    })
                    .collect();
            }
            MovieEvent::CapDeath { circle, dotted } => {
                let t = circle
                    .checked_sub(m.n_essential)
                    .filter(|&t| t < seam_free.len())
                    .ok_or_else(|| Error::Position(format!("circle {circle} is not a trivial circle")))?;
                if !seam_free[t] {
                    return Err(Error::Position(format!("cap on seam-crossing circle {circle}")));
                }
                seam_free.remove(t);
                let keep = *dotted;
                let mut next = Vector::new();
                for (mut k, v) in state {
                    if k.trivial[t] == keep {
                        k.trivial.remove(t);
                        *next.entry(k).or_default() += &v;
                    }
                }
                next.retain(|_, v| !v.is_zero());
                state = next;
            }
            MovieEvent::Saddle { source, site } => {
                let target = saddle_target(source, site)?;
                let mat = eval_saddle(source, site, scheme)?;
                let mut next = Vector::new();
                for (k, v) in state {
                    for (row, c) in mat.matrix.column(k.index()) {
                        let lbl = GeneratorLabel::from_index(*row, target.n_essential, target.n_trivial());
                        *next.entry(lbl).or_default() += &(c * &v);
                    }
                }
                next.retain(|_, v| !v.is_zero());
                seam_free = target.circles[target.n_essential..].iter().map(|c| c.seam_free()).collect();
                state = next;
            }
        }
    }
    Ok(state)
}

/// Saddle map with explicit source and target configurations.
#[derive(Clone, Debug)]
pub struct SaddleMatrix {
    pub source_ess: usize,
    pub source_triv: usize,
    pub target_ess: usize,
    pub target_triv: usize,
    pub matrix: LMatrix,
}

/// The configuration obtained by surgery along the site's arc.
pub fn saddle_target(cu: &Configuration, site: &SurgerySite) -> Result<Configuration> {
    let mut slices = cu.tangle.slices.clone();
    slices[site.slice] = match slices[site.slice] {
        FlatSlice::Id => FlatSlice::Turnback(site.pos),
        FlatSlice::Turnback(i) if i == site.pos => FlatSlice::Id,
        other => return Err(Error::Seam(format!("slice {} ({other:?}) carries no surgery arc", site.slice))),
    };
    FlatTangle::new(cu.tangle.k, slices)?.configuration()
}

/// Quantum saddle map in the scheme-normalized bases.
pub fn eval_saddle(cu: &Configuration, site: &SurgerySite, scheme: &WeightScheme) -> Result<SaddleMatrix> {
    let cv = saddle_target(cu, site)?;
    let m = canonical_saddle(cu, &cv, site.slice)?;
    let shift = standardization_weight(&cv, scheme) - standardization_weight(cu, scheme);
    Ok(SaddleMatrix {
        source_ess: cu.n_essential,
        source_triv: cu.n_trivial(),
        target_ess: cv.n_essential,
        target_triv: cv.n_trivial(),
        matrix: if shift == 0 { m } else { m.scale(&Laurent::monomial(1, shift)) },
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum EdgeKey {
    Tangle(usize, usize, usize),
    Below(usize, usize),
    Above(usize, usize),
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// One side of the closed-up composite: a cut tangle with the standardizing
/// pieces of the source glued below and of the target glued above.
struct Side {
    comps: Vec<CompInfo>,
    edge_comp: HashMap<EdgeKey, usize>,
}

#[derive(Default, Clone)]
struct CompInfo {
    exts: Vec<usize>,
    below: bool,
    above: bool,
    nodes: Vec<usize>,
    keys: Vec<EdgeKey>,
}

fn build_side(t: &FlatTangle, bu: &Boundary, bv: &Boundary) -> Result<Side> {
    let n = t.n_nodes();
    let l = t.len();
    let pu = bu.through.len();
    let pv = bv.through.len();
    let mut edges: Vec<(EdgeKey, usize, usize)> = Vec::new();
    for (s, a, b) in t.edges() {
        edges.push((EdgeKey::Tangle(s, a.min(b), a.max(b)), a, b));
    }
    for j in 0..t.k {
        let a = t.node(0, j);
        match bu.top[j] {
            End::Top(j2) => {
                if j < j2 {
                    let b = t.node(0, j2);
                    edges.push((EdgeKey::Below(a, b), a, b));
                }
            }
            End::Bottom(beta) => {
                let idx = bu.through.iter().position(|&(b0, t0)| b0 == beta && t0 == j).expect("through strand");
                edges.push((EdgeKey::Below(a, n + idx), a, n + idx));
            }
        }
        let a = t.node(l, j);
        match bv.bottom[j] {
            End::Bottom(j2) => {
                if j < j2 {
                    let b = t.node(l, j2);
                    edges.push((EdgeKey::Above(a, b), a, b));
                }
            }
            End::Top(_) => {
                let idx = bv.through.iter().position(|&(b0, _)| b0 == j).expect("through strand");
                edges.push((EdgeKey::Above(a, n + pu + idx), a, n + pu + idx));
            }
        }
    }
    let total = n + pu + pv;
    let mut dsu = Dsu::new(total);
    for &(_, a, b) in &edges {
        dsu.union(a, b);
    }
    let mut root_comp = HashMap::new();
    let mut comps: Vec<CompInfo> = Vec::new();
    let mut comp_of = vec![usize::MAX; total];
    for x in 0..total {
        let r = dsu.find(x);
        let c = *root_comp.entry(r).or_insert_with(|| {
            comps.push(CompInfo::default());
            comps.len() - 1
        });
        comp_of[x] = c;
        if x >= n {
            comps[c].exts.push(x - n);
        } else {
            comps[c].nodes.push(x);
        }
    }
    let mut edge_comp = HashMap::new();
    for &(key, a, _) in &edges {
        let c = comp_of[a];
        match key {
            EdgeKey::Below(..) => comps[c].below = true,
            EdgeKey::Above(..) => comps[c].above = true,
            EdgeKey::Tangle(..) => {}
        }
        comps[c].keys.push(key);
        edge_comp.insert(key, c);
    }
    for c in &comps {
        if c.exts.is_empty() && c.below && c.above {
            return Err(Error::Topology("seam loop touches both standardizing pieces".into()));
        }
        if !c.exts.is_empty() && c.exts.len() != 2 {
            return Err(Error::Topology("arc component without two ends".into()));
        }
    }
    Ok(Side { comps, edge_comp })
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Var {
    Input(usize),
    Eps(usize),
    Output(usize),
}

struct Constraint {
    has_arc: bool,
    /// (variable, counts when labelled `-`)
    lits: Vec<(Var, bool)>,
}

/// Saddle matrix between canonical generators of `cu` and `cv`, which differ in slice `slice` only.
pub fn canonical_saddle(cu: &Configuration, cv: &Configuration, slice: usize) -> Result<LMatrix> {
    let tu = &cu.tangle;
    let tv = &cv.tangle;
    let bu = tu.boundary();
    let bv = tv.boundary();
    let (pu, pv) = (bu.through.len(), bv.through.len());
    if pu != cu.n_essential || pv != cv.n_essential {
        return Err(Error::Topology("through strands do not match essential circles".into()));
    }
    for (conf, b) in [(cu, &bu), (cv, &bv)] {
        for (t, &(beta, _)) in b.through.iter().enumerate() {
            if conf.circle_of(conf.tangle.node(0, beta)) != t {
                return Err(Error::Topology("essential order differs from through-strand order".into()));
            }
        }
    }
    let x = build_side(tu, &bu, &bv)?;
    let y = build_side(tv, &bu, &bv)?;
    let n = tu.n_nodes();
    let l = tu.len();

    // surface components: X comps are 0..nx, Y comps nx..
    let nx = x.comps.len();
    let mut dsu = Dsu::new(nx + y.comps.len());
    let mut touched = Vec::new();
    for (side, off, other) in [(&x, 0, &y), (&y, nx, &x)] {
        for (ci, c) in side.comps.iter().enumerate() {
            let mut hit = false;
            for key in &c.keys {
                if let Some(&oc) = other.edge_comp.get(key) {
                    let other_off = if off == 0 { nx } else { 0 };
                    dsu.union(off + ci, other_off + oc);
                } else {
                    debug_assert!(matches!(key, EdgeKey::Tangle(s, ..) if *s == slice));
                    hit = true;
                }
            }
            if hit {
                touched.push(off + ci);
            }
        }
    }
    for w in touched.windows(2) {
        dsu.union(w[0], w[1]);
    }

    // loop items
    let triv_u = |node: usize| -> Result<usize> {
        let c = cu.circle_of(node);
        c.checked_sub(cu.n_essential).ok_or_else(|| Error::Topology("input loop on an essential circle".into()))
    };
    let triv_v = |node: usize| -> Result<usize> {
        let c = cv.circle_of(node);
        c.checked_sub(cv.n_essential).ok_or_else(|| Error::Topology("output loop on an essential circle".into()))
    };
    let mut eps_ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut eps_seen = Vec::new();
    let mut lits_of: BTreeMap<usize, Vec<(Var, bool)>> = BTreeMap::new();
    let mut has_arc: BTreeSet<usize> = BTreeSet::new();
    let mut seen_in = vec![0usize; cu.n_trivial()];
    let mut seen_out = vec![0usize; cv.n_trivial()];
    let mut arcs_x: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut arcs_y: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (off, side, is_x) in [(0, &x, true), (nx, &y, false)] {
        for (ci, c) in side.comps.iter().enumerate() {
            let root = dsu.find(off + ci);
            if !c.exts.is_empty() {
                has_arc.insert(root);
                let pair = (c.exts[0].min(c.exts[1]), c.exts[0].max(c.exts[1]));
                if is_x { arcs_x.insert(pair) } else { arcs_y.insert(pair) };
                continue;
            }
            let seam_loop = if is_x { c.above } else { c.below };
            let lit = if seam_loop {
                let level = if is_x { l } else { 0 };
                let key: Vec<usize> = c
                    .nodes
                    .iter()
                    .filter_map(|&v| {
                        let (lv, p) = tu.node_pos(v);
                        (lv == level).then_some(p)
                    })
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let next = eps_ids.len();
                let id = *eps_ids.entry(key).or_insert(next);
                if id == eps_seen.len() {
                    eps_seen.push((false, false));
                }
                if is_x { eps_seen[id].0 = true } else { eps_seen[id].1 = true };
                (Var::Eps(id), is_x)
            } else if is_x {
                let t = triv_u(c.nodes[0])?;
                seen_in[t] += 1;
                (Var::Input(t), true)
            } else {
                let t = triv_v(c.nodes[0])?;
                seen_out[t] += 1;
                (Var::Output(t), false)
            };
            lits_of.entry(root).or_default().push(lit);
        }
    }
    if seen_in.iter().any(|&s| s != 1) || seen_out.iter().any(|&s| s != 1) {
        return Err(Error::Topology("trivial circles not matched to loops".into()));
    }
    if eps_seen.iter().any(|&(a, b)| !(a && b)) {
        return Err(Error::Topology("seam loop appears on one side only".into()));
    }
    if arcs_x != arcs_y {
        return Err(Error::Topology("saddle changes the essential arc pattern".into()));
    }
    let _ = n;
    let roots: BTreeSet<usize> = (0..nx + y.comps.len()).map(|i| dsu.find(i)).collect();
    let constraints: Vec<Constraint> = roots
        .into_iter()
        .map(|r| Constraint { has_arc: has_arc.contains(&r), lits: lits_of.remove(&r).unwrap_or_default() })
        .collect();

    let trivial = trivial_factor(&constraints, eps_ids.len(), cu.n_trivial(), cv.n_trivial());
    let essential = essential_factor(&arcs_x, pu, pv);

    // rotation correction on the seam-crossing trivial circles of the target
    let seam_triv: Vec<usize> =
        (0..cv.n_trivial()).filter(|&t| !cv.circles[cv.n_essential + t].seam_free()).collect();
    let rot = |jout: usize| -> i64 {
        -TRACE_SIGN * seam_triv.iter().map(|&t| if jout >> t & 1 == 0 { 1 } else { -1 }).sum::<i64>()
    };

    let cols = (0..(1usize << (pu + cu.n_trivial())))
        .map(|col| {
            let (iu, ju) = (col & ((1 << pu) - 1), col >> pu);
            let mut out: BTreeMap<usize, Laurent> = BTreeMap::new();
            for (iv, ce) in &essential[iu] {
                for (jv, ct) in &trivial[ju] {
                    let v = (ce * ct).shift(rot(*jv));
                    *out.entry(iv | (jv << pv)).or_default() += &v;
                }
            }
            out
        })
        .collect();
    Ok(LMatrix::from_columns(1 << (pv + cv.n_trivial()), cols))
}

/// For each input trivial labelling, the output trivial labellings with their
/// weights, summing over seam-loop labels.
fn trivial_factor(cons: &[Constraint], n_eps: usize, n_in: usize, n_out: usize) -> Vec<Vec<(usize, Laurent)>> {
    // group constraints into blocks sharing free variables
    let nc = cons.len();
    let mut dsu = Dsu::new(nc);
    let mut owner: HashMap<Var, usize> = HashMap::new();
    for (ci, c) in cons.iter().enumerate() {
        for (v, _) in &c.lits {
            if matches!(v, Var::Input(_)) {
                continue;
            }
            if let Some(&o) = owner.get(v) {
                dsu.union(o, ci);
            } else {
                owner.insert(*v, ci);
            }
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for ci in 0..nc {
        blocks.entry(dsu.find(ci)).or_default().push(ci);
    }
    let _ = n_eps;
    // each block depends only on the inputs it mentions; tabulate it once per input pattern
    struct Table {
        inputs: Vec<usize>,
        by_inputs: Vec<Vec<(usize, Laurent)>>,
    }
    let mut tables = Vec::with_capacity(blocks.len());
    for members in blocks.values() {
        let mut free: Vec<Var> = Vec::new();
        let mut inputs: Vec<usize> = Vec::new();
        for &ci in members {
            for (v, _) in &cons[ci].lits {
                match v {
                    Var::Input(t) => {
                        if !inputs.contains(t) {
                            inputs.push(*t)
                        }
                    }
                    _ => {
                        if !free.contains(v) {
                            free.push(*v)
                        }
                    }
                }
            }
        }
        assert!(free.len() + inputs.len() <= 24, "saddle block too large");
        let mut by_inputs = Vec::with_capacity(1 << inputs.len());
        for ib in 0..(1usize << inputs.len()) {
            let mut partial: BTreeMap<usize, Laurent> = BTreeMap::new();
            for asg in 0..(1usize << free.len()) {
                let minus = |v: &Var| -> bool {
                    match v {
                        Var::Input(t) => ib >> inputs.iter().position(|x| x == t).unwrap() & 1 == 1,
                        _ => asg >> free.iter().position(|f| f == v).unwrap() & 1 == 1,
                    }
                };
                let ok = members.iter().all(|&ci| {
                    let c = &cons[ci];
                    let count = c.lits.iter().filter(|(v, x_side)| minus(v) == *x_side).count();
                    if c.has_arc {
                        count == 0
                    } else {
                        count == 1
                    }
                });
                if !ok {
                    continue;
                }
                let mut e = 0;
                let mut out_bits = 0;
                for (fi, v) in free.iter().enumerate() {
                    let m = asg >> fi & 1 == 1;
                    match v {
                        Var::Eps(_) => e += if m { -TRACE_SIGN } else { TRACE_SIGN },
                        Var::Output(t) => {
                            if m {
                                out_bits |= 1 << t
                            }
                        }
                        Var::Input(_) => unreachable!(),
                    }
                }
                partial.entry(out_bits).or_default().add_term(1, e);
            }
            partial.retain(|_, v| !v.is_zero());
            by_inputs.push(partial.into_iter().collect());
        }
        tables.push(Table { inputs, by_inputs });
    }
    let mut result = Vec::with_capacity(1 << n_in);
    for jin in 0..(1usize << n_in) {
        let mut acc: Vec<(usize, Laurent)> = vec![(0, Laurent::one())];
        for t in &tables {
            let ib: usize = t.inputs.iter().enumerate().map(|(i, &x)| (jin >> x & 1) << i).sum();
            let partial = &t.by_inputs[ib];
            let mut next = Vec::with_capacity(acc.len() * partial.len());
            for (b0, c0) in &acc {
                for (b1, c1) in partial {
                    next.push((b0 | b1, c0 * c1));
                }
            }
            acc = next;
            if acc.is_empty() {
                break;
            }
        }
        let mut merged: BTreeMap<usize, Laurent> = BTreeMap::new();
        for (b, c) in acc {
            debug_assert!(b < (1 << n_out));
            *merged.entry(b).or_default() += &c;
        }
        merged.retain(|_, v| !v.is_zero());
        result.push(merged.into_iter().collect());
    }
    result
}

/// Temperley-Lieb evaluation of the essential arc pattern: caps on the source
/// side evaluate, cups on the target side coevaluate, through arcs carry labels.
fn essential_factor(arcs: &BTreeSet<(usize, usize)>, pu: usize, pv: usize) -> Vec<Vec<(usize, Laurent)>> {
    let mut caps = Vec::new();
    let mut cups = Vec::new();
    let mut thr = Vec::new();
    for &(a, b) in arcs {
        match (a < pu, b < pu) {
            (true, true) => caps.push((a, b)),
            (false, false) => cups.push((a - pu, b - pu)),
            (true, false) => thr.push((a, b - pu)),
            (false, true) => unreachable!("pairs are sorted"),
        }
    }
    (0..(1usize << pu))
        .map(|iu| {
            let minus = |i: usize| iu >> i & 1 == 1;
            let mut coef = Laurent::one();
            for &(a, b) in &caps {
                match (minus(a), minus(b)) {
                    (false, true) => coef = coef.shift(1),
                    (true, false) => {}
                    _ => return Vec::new(),
                }
            }
            let mut base = 0usize;
            for &(a, b) in &thr {
                if minus(a) {
                    base |= 1 << b;
                }
            }
            let mut terms = vec![(base, coef)];
            for &(a, b) in &cups {
                let mut next = Vec::with_capacity(terms.len() * 2);
                for (bits, c) in terms {
                    next.push((bits | 1 << b, c.clone()));
                    next.push((bits | 1 << a, c.shift(-1)));
                }
                terms = next;
            }
            debug_assert!(terms.iter().all(|(b, _)| *b < (1 << pv)));
            terms
        })
        .collect()
}

/// Classical annular saddle (q = 1), computed from the circle census alone.
pub fn classical_saddle(cu: &Configuration, site: &SurgerySite) -> Result<Vec<Vec<(usize, i64)>>> {
    let cv = saddle_target(cu, site)?;
    let t = &cu.tangle;
    let local = [
        t.node(site.slice, site.pos),
        t.node(site.slice, site.pos + 1),
        t.node(site.slice + 1, site.pos),
        t.node(site.slice + 1, site.pos + 1),
    ];
    let src: BTreeSet<usize> = local.iter().map(|&x| cu.circle_of(x)).collect();
    let dst: BTreeSet<usize> = local.iter().map(|&x| cv.circle_of(x)).collect();
    // untouched circles: source circle -> target circle
    let mut carry: Vec<(usize, usize)> = Vec::new();
    for (ci, c) in cu.circles.iter().enumerate() {
        if !src.contains(&ci) {
            let d = cv.circle_of(c.nodes[0]);
            if dst.contains(&d) {
                return Err(Error::Topology("untouched circle meets the saddle".into()));
            }
            carry.push((ci, d));
        }
    }
    let ess_u = |c: usize| c < cu.n_essential;
    let ess_v = |c: usize| c < cv.n_essential;
    let src: Vec<usize> = src.into_iter().collect();
    let dst: Vec<usize> = dst.into_iter().collect();
    let n_src = cu.circles.len();
    let mut cols = Vec::with_capacity(1 << n_src);
    for x in 0..(1usize << n_src) {
        let plus_u = |c: usize| x >> c & 1 == 0;
        let mut base = 0usize;
        for &(a, b) in &carry {
            if !plus_u(a) {
                base |= 1 << b;
            }
        }
        let set = |bits: usize, c: usize, plus: bool| if plus { bits } else { bits | 1 << c };
        let mut out: Vec<(usize, i64)> = Vec::new();
        match (src.as_slice(), dst.as_slice()) {
            (&[a, b], &[c]) => {
                let (la, lb) = (plus_u(a), plus_u(b));
                match (ess_u(a), ess_u(b), ess_v(c)) {
                    (false, false, false) => {
                        if la || lb {
                            out.push((set(base, c, la && lb), 1));
                        }
                    }
                    (true, false, true) | (false, true, true) => {
                        let (le, lt) = if ess_u(a) { (la, lb) } else { (lb, la) };
                        if lt {
                            out.push((set(base, c, le), 1));
                        }
                    }
                    (true, true, false) => {
                        if la != lb {
                            out.push((set(base, c, false), 1));
                        }
                    }
                    _ => return Err(Error::Topology("impossible merge type".into())),
                }
            }
            (&[a], &[c, d]) => {
                let la = plus_u(a);
                match (ess_u(a), ess_v(c), ess_v(d)) {
                    (false, false, false) => {
                        if la {
                            out.push((set(set(base, c, true), d, false), 1));
                            out.push((set(set(base, c, false), d, true), 1));
                        } else {
                            out.push((set(set(base, c, false), d, false), 1));
                        }
                    }
                    (true, true, false) | (true, false, true) => {
                        let (e, tr) = if ess_v(c) { (c, d) } else { (d, c) };
                        out.push((set(set(base, e, la), tr, false), 1));
                    }
                    (false, true, true) => {
                        if la {
                            out.push((set(set(base, c, true), d, false), 1));
                            out.push((set(set(base, c, false), d, true), 1));
                        }
                    }
                    _ => return Err(Error::Topology("impossible split type".into())),
                }
            }
            _ => return Err(Error::Topology("surgery neither merges nor splits".into())),
        }
        out.sort();
        cols.push(out);
    }
    Ok(cols)
}

/// Kinds of saddles, by the circles involved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SaddleType {
    MergeTrivial,
    SplitTrivial,
    MergeIntoEssential,
    SplitOffEssential,
    MergeEssentials,
    SplitIntoEssentials,
}

pub fn saddle_type(cu: &Configuration, site: &SurgerySite) -> Result<SaddleType> {
    let cv = saddle_target(cu, site)?;
    let ne_u = cu.n_essential;
    let ne_v = cv.n_essential;
    let merge = cv.circles.len() < cu.circles.len();
    Ok(match (merge, ne_u as i64 - ne_v as i64) {
        (true, 0) if site.anchors.iter().any(|a| a.0 < ne_u) => SaddleType::MergeIntoEssential,
        (true, 0) => SaddleType::MergeTrivial,
        (true, 2) => SaddleType::MergeEssentials,
        (false, 0) if site.anchors[0].0 < ne_u => SaddleType::SplitOffEssential,
        (false, 0) => SaddleType::SplitTrivial,
        (false, -2) => SaddleType::SplitIntoEssentials,
        _ => return Err(Error::Topology("unclassifiable saddle".into())),
    })
}
