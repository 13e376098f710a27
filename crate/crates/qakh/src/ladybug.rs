//! Ladybug matchings, read off a planar picture of the annulus.
//!
//! The cut square is wrapped into the plane by polar coordinates: the level
//! coordinate becomes the angle and the strand position (plus an offset) the
//! radius, so the puncture sits at the origin.

use crate::diagram::{Configuration, FlatSlice, SurgerySite};
use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Which of the two pairings of a ladybug to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Subdivisions per drawn edge; the midpoint index is `SUB / 2`.
const SUB: usize = 16;
const RADIUS_OFFSET: f64 = 1.5;

type Pt = (f64, f64);

#[derive(Clone, Copy, Debug)]
struct DrawnEdge {
    slice: Option<usize>,
    a: usize,
    b: usize,
}

fn closure_edges(conf: &Configuration) -> Vec<DrawnEdge> {
    let t = &conf.tangle;
    let l = t.len();
    let mut out: Vec<DrawnEdge> =
        t.edges().into_iter().map(|(s, a, b)| DrawnEdge { slice: Some(s), a, b }).collect();
    out.extend((0..t.k).map(|j| DrawnEdge { slice: None, a: t.node(l, j), b: t.node(0, j) }));
    out
}

fn segment(p: Pt, q: Pt, steps: usize, out: &mut Vec<Pt>) {
    for s in 0..steps {
        let t = s as f64 / steps as f64;
        out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
    }
}

/// Points of an edge from `a` to `b` in (level, position) coordinates, both ends included.
fn polyline(conf: &Configuration, e: &DrawnEdge) -> Vec<Pt> {
    let t = &conf.tangle;
    let (la, xa) = t.node_pos(e.a);
    let (lb, xb) = t.node_pos(e.b);
    let pa = (la as f64, xa as f64);
    let mut pb = (lb as f64, xb as f64);
    let mut out = Vec::with_capacity(SUB + 1);
    match e.slice {
        None => {
            pb = (t.len() as f64 + 1.0, xb as f64);
            segment(pa, pb, SUB, &mut out);
        }
        Some(_) if la != lb => segment(pa, pb, SUB, &mut out),
        Some(s) => {
            let bulge = if la == s { 0.3 } else { -0.3 };
            let apex = (la as f64 + bulge, (xa + xb) as f64 / 2.0);
            segment(pa, apex, SUB / 2, &mut out);
            segment(apex, pb, SUB / 2, &mut out);
        }
    }
    out.push(pb);
    out
}

fn to_plane(p: Pt, period: f64) -> Pt {
    let theta = 2.0 * PI * p.0 / period;
    let rad = p.1 + RADIUS_OFFSET;
    (rad * theta.cos(), rad * theta.sin())
}

/// Edge ids of the two strands joined by a surgery arc, and the arc midpoint.
fn arc_of(conf: &Configuration, edges: &[DrawnEdge], site: &SurgerySite) -> Result<([usize; 2], Pt)> {
    let t = &conf.tangle;
    let (l, i) = (site.slice, site.pos);
    let want = match t.slices[l] {
        FlatSlice::Id => [(t.node(l, i), t.node(l + 1, i)), (t.node(l, i + 1), t.node(l + 1, i + 1))],
        FlatSlice::Turnback(_) => [(t.node(l, i), t.node(l, i + 1)), (t.node(l + 1, i), t.node(l + 1, i + 1))],
        other => return Err(Error::Ambiguity(format!("slice {l} is {other:?}, not a 0-smoothing"))),
    };
    let find = |(a, b): (usize, usize)| {
        edges
            .iter()
            .position(|e| e.slice == Some(l) && ((e.a, e.b) == (a, b) || (e.a, e.b) == (b, a)))
            .ok_or_else(|| Error::Ambiguity(format!("no edge for arc at slice {l}")))
    };
    Ok(([find(want[0])?, find(want[1])?], (l as f64 + 0.5, i as f64 + 0.5)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Event {
    Node(usize),
    Marker(usize),
}

fn inside(poly: &[Pt], p: Pt) -> bool {
    let mut hit = false;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) {
            let x = a.0 + (p.1 - a.1) / (b.1 - a.1) * (b.0 - a.0);
            if x > p.0 {
                hit = !hit;
            }
        }
    }
    hit
}

fn signed_area(poly: &[Pt]) -> f64 {
    let n = poly.len();
    (0..n).map(|k| poly[k].0 * poly[(k + 1) % n].1 - poly[(k + 1) % n].0 * poly[k].1).sum::<f64>() / 2.0
}

/// Pairing of the two circles after surgery on `s1` (in `cv1`) with the two
/// circles after surgery on `s2` (in `cv2`), for a ladybug on a trivial circle of `cu`.
///
/// Circles are matched when they share a stretch of the original circle that,
/// read counterclockwise, runs from an endpoint of the inner arc to an endpoint
/// of the outer arc (`Left`), or the other way round (`Right`). The left pair
/// is the one forced by q-powers on ladybugs once q^2 != 1.
pub fn ladybug_pairs(
    cu: &Configuration,
    cv1: &Configuration,
    cv2: &Configuration,
    s1: &SurgerySite,
    s2: &SurgerySite,
    side: Side,
) -> Result<[(usize, usize); 2]> {
    let circle = s1.anchors[0].0;
    if [s1.anchors[1].0, s2.anchors[0].0, s2.anchors[1].0].iter().any(|&c| c != circle) {
        return Err(Error::Ambiguity("surgery arcs do not lie on one circle".into()));
    }
    if circle < cu.n_essential {
        return Err(Error::Ambiguity("ladybug on an essential circle has no matching".into()));
    }
    let edges = closure_edges(cu);
    let (e1, mid1) = arc_of(cu, &edges, s1)?;
    let (e2, mid2) = arc_of(cu, &edges, s2)?;
    let marker = |id: usize| {
        if e1.contains(&id) {
            Some(0)
        } else if e2.contains(&id) {
            Some(1)
        } else {
            None
        }
    };

    let mut inc = vec![Vec::new(); cu.tangle.n_nodes()];
    for (id, e) in edges.iter().enumerate() {
        inc[e.a].push(id);
        inc[e.b].push(id);
    }
    let start = cu.circles[circle].nodes[0];
    let mut poly = Vec::new();
    let mut events = Vec::new();
    let (mut cur, mut via) = (start, inc[start][0]);
    loop {
        let e = edges[via];
        let mut pts = polyline(cu, &e);
        let next = if e.a == cur { e.b } else {
            pts.reverse();
            e.a
        };
        pts.pop();
        events.push(Event::Node(cur));
        if let Some(m) = marker(via) {
            events.push(Event::Marker(m));
        }
        poly.extend(pts);
        cur = next;
        if cur == start {
            break;
        }
        via = if inc[cur][0] == via { inc[cur][1] } else { inc[cur][0] };
    }

    let period = cu.tangle.len() as f64 + 1.0;
    let plane: Vec<Pt> = poly.iter().map(|&p| to_plane(p, period)).collect();
    if signed_area(&plane) < 0.0 {
        events.reverse();
    }
    let in1 = inside(&plane, to_plane(mid1, period));
    let in2 = inside(&plane, to_plane(mid2, period));
    if in1 == in2 {
        return Err(Error::Ambiguity("both surgery arcs on the same side of the circle".into()));
    }
    let inner = if in1 { 0 } else { 1 };
    let markers: Vec<usize> = events.iter().filter_map(|e| if let Event::Marker(m) = e { Some(*m) } else { None }).collect();
    if markers.len() != 4 || (0..4).any(|k| markers[k] == markers[(k + 1) % 4]) {
        return Err(Error::Ambiguity("surgery endpoints do not alternate".into()));
    }

    let from_arc = match side {
        Side::Left => inner,
        Side::Right => 1 - inner,
    };
    let n = events.len();
    let mut pairs = Vec::new();
    for k in 0..n {
        if events[k] != Event::Marker(from_arc) {
            continue;
        }
        let node = (1..n).map(|d| events[(k + d) % n]).find_map(|e| match e {
            Event::Node(x) => Some(x),
            Event::Marker(_) => None,
        });
        let node = node.ok_or_else(|| Error::Ambiguity("empty stretch between endpoints".into()))?;
        pairs.push((cv1.circle_of(node), cv2.circle_of(node)));
    }
    Ok([pairs[0], pairs[1]])
}
