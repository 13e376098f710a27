//! Homology of complexes over k_r as abelian groups with a q-action.
//!
//! Each (j, k) summand is unrolled into a complex of free abelian groups with
//! one Z summand per element q^l x. Free ranks and torsion come from Smith
//! normal forms; the q-action on the free part is recorded through its
//! characteristic polynomial, a product of cyclotomic polynomials Φ_d with
//! d | r whose multiplicities are read off from ranks on isotypic parts.

use crate::complex::{CubeComplex, Ring};
use crate::scalar::Laurent;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m.data[i * c + j] = BigInt::from(v);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = IntMatrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.at(k, j);
                    if !b.is_zero() {
                        *out.at_mut(i, j) += a * b;
                    }
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[a] -= f * row[b]
    fn row_axpy(&mut self, a: usize, b: usize, f: &BigInt) {
        for j in 0..self.cols {
            let v = self.at(b, j) * f;
            if !v.is_zero() {
                *self.at_mut(a, j) -= v;
            }
        }
    }

    /// col[a] -= f * col[b]
    fn col_axpy(&mut self, a: usize, b: usize, f: &BigInt) {
        for i in 0..self.rows {
            let v = self.at(i, b) * f;
            if !v.is_zero() {
                *self.at_mut(i, a) -= v;
            }
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.at(a, j).clone();
            *self.at_mut(a, j) = v;
        }
    }
}

/// Smith normal form with transforms: `u * m * v == d`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    /// Nonzero diagonal entries, each dividing the next.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.at(i, i).clone()).filter(|x| !x.is_zero()).collect()
    }
}

struct Transforms {
    u: Option<IntMatrix>,
    v: Option<IntMatrix>,
}

impl Transforms {
    fn swap_rows(&mut self, a: usize, b: usize) {
        if let Some(u) = &mut self.u {
            u.swap_rows(a, b);
        }
    }
    fn swap_cols(&mut self, a: usize, b: usize) {
        if let Some(v) = &mut self.v {
            v.swap_cols(a, b);
        }
    }
    fn row_axpy(&mut self, a: usize, b: usize, f: &BigInt) {
        if let Some(u) = &mut self.u {
            u.row_axpy(a, b, f);
        }
    }
    fn col_axpy(&mut self, a: usize, b: usize, f: &BigInt) {
        if let Some(v) = &mut self.v {
            v.col_axpy(a, b, f);
        }
    }
    fn negate_row(&mut self, a: usize) {
        if let Some(u) = &mut self.u {
            u.negate_row(a);
        }
    }
}

fn smith_in_place(m: &mut IntMatrix, t: &mut Transforms) {
    let (rows, cols) = (m.rows, m.cols);
    let mut s = 0;
    while s < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in s..rows {
            for j in s..cols {
                let x = m.at(i, j);
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < m.at(bi, bj).abs()) {
                    best = Some((i, j));
                    if x.abs().is_one() {
                        break;
                    }
                }
            }
            if best.is_some_and(|(bi, bj)| m.at(bi, bj).abs().is_one()) {
                break;
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap_rows(s, pi);
        t.swap_rows(s, pi);
        m.swap_cols(s, pj);
        t.swap_cols(s, pj);
        loop {
            let p = m.at(s, s).clone();
            let mut dirty = false;
            for i in s + 1..rows {
                if m.at(i, s).is_zero() {
                    continue;
                }
                let f = m.at(i, s).div_floor(&p);
                m.row_axpy(i, s, &f);
                t.row_axpy(i, s, &f);
                if !m.at(i, s).is_zero() {
                    dirty = true;
                }
            }
            for j in s + 1..cols {
                if m.at(s, j).is_zero() {
                    continue;
                }
                let f = m.at(s, j).div_floor(&p);
                m.col_axpy(j, s, &f);
                t.col_axpy(j, s, &f);
                if !m.at(s, j).is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                // divisibility: fold any entry not divisible by the pivot into row s
                let bad = (s + 1..rows).find_map(|i| {
                    (s + 1..cols).find(|&j| !m.at(i, j).is_zero() && !m.at(i, j).is_multiple_of(&p)).map(|_| i)
                });
                match bad {
                    Some(i) => {
                        let one = BigInt::from(-1);
                        m.row_axpy(s, i, &one);
                        t.row_axpy(s, i, &one);
                        continue;
                    }
                    None => break,
                }
            }
            // move the smallest remaining entry of row/column s onto the pivot
            let mut best = (s, s);
            for i in s..rows {
                let x = m.at(i, s);
                if !x.is_zero() && x.abs() < m.at(best.0, best.1).abs() {
                    best = (i, s);
                }
            }
            for j in s..cols {
                let x = m.at(s, j);
                if !x.is_zero() && x.abs() < m.at(best.0, best.1).abs() {
                    best = (s, j);
                }
            }
            if best.0 != s {
                m.swap_rows(s, best.0);
                t.swap_rows(s, best.0);
            }
            if best.1 != s {
                m.swap_cols(s, best.1);
                t.swap_cols(s, best.1);
            }
        }
        if m.at(s, s).is_negative() {
            m.negate_row(s);
            t.negate_row(s);
        }
        s += 1;
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let mut d = m.clone();
    let mut t = Transforms { u: Some(IntMatrix::identity(m.rows)), v: Some(IntMatrix::identity(m.cols)) };
    smith_in_place(&mut d, &mut t);
    Smith { u: t.u.unwrap(), d, v: t.v.unwrap() }
}

/// Nonzero invariant factors, without transforms.
pub fn invariant_factors(m: &IntMatrix) -> Vec<BigInt> {
    let mut d = m.clone();
    smith_in_place(&mut d, &mut Transforms { u: None, v: None });
    (0..d.rows.min(d.cols)).map(|i| d.at(i, i).clone()).filter(|x| !x.is_zero()).collect()
}

/// Rank over Q by fraction-free elimination.
pub fn rank_q(m: &IntMatrix) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a.at(i, c).is_zero()) else { continue };
        a.swap_rows(rank, p);
        let piv = a.at(rank, c).clone();
        for i in rank + 1..rows {
            let f = a.at(i, c).clone();
            for j in c..cols {
                let v = (&piv * a.at(i, j) - &f * a.at(rank, j)) / &prev;
                *a.at_mut(i, j) = v;
            }
        }
        prev = piv;
        rank += 1;
    }
    rank
}

/// Integer polynomial coefficients, constant term first.
pub type IntPoly = Vec<i64>;

fn poly_mul(a: &[i64], b: &[i64]) -> IntPoly {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division of integer polynomials with monic divisor.
fn poly_div(a: &[i64], b: &[i64]) -> IntPoly {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    assert_eq!(*b.last().unwrap(), 1, "monic divisor");
    if rem.len() <= db {
        return vec![0];
    }
    let mut q = vec![0; rem.len() - db];
    for i in (0..q.len()).rev() {
        let c = rem[i + db];
        q[i] = c;
        for (j, y) in b.iter().enumerate() {
            rem[i + j] -= c * y;
        }
    }
    assert!(rem.iter().all(|&x| x == 0), "inexact polynomial division");
    q
}

/// Cyclotomic polynomial Φ_d.
pub fn cyclotomic(d: u32) -> IntPoly {
    let mut p = vec![-1i64];
    p.resize(d as usize + 1, 0);
    p[d as usize] = 1;
    for e in 1..d {
        if d.is_multiple_of(e) {
            p = poly_div(&p, &cyclotomic(e));
        }
    }
    p
}

fn divisors(r: u32) -> Vec<u32> {
    (1..=r).filter(|d| r.is_multiple_of(*d)).collect()
}

fn euler_phi(d: u32) -> usize {
    cyclotomic(d).len() - 1
}

/// Homology of one tridegree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub free_rank: usize,
    pub torsion: Vec<String>,
    /// Multiplicity of Φ_d in the characteristic polynomial of q, for d | r.
    pub cyclotomic_multiplicities: BTreeMap<u32, usize>,
    /// Characteristic polynomial of q on the free part, constant term first.
    pub charpoly: IntPoly,
    pub trace: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyTable {
    pub r: u32,
    /// (h, j, k) -> group; zero groups are omitted.
    pub groups: BTreeMap<(i64, i64, i64), HomologyGroup>,
}

/// Per (j, k): chain groups by h, each a list of (vertex, generator).
type Summands = BTreeMap<(i64, i64), BTreeMap<i64, Vec<(usize, usize)>>>;

fn summands(c: &CubeComplex) -> Summands {
    let mut out: Summands = BTreeMap::new();
    for (vi, v) in c.vertices.iter().enumerate() {
        for g in 0..v.rank() {
            let t = c.tridegree(vi, g);
            out.entry((t.j, t.k)).or_default().entry(t.h).or_default().push((vi, g));
        }
    }
    out
}

/// Integer matrix of d: C^h -> C^{h+1} on the Z-basis q^l x, with each entry
/// first multiplied by `twist` (used for the isotypic projections).
fn unrolled(
    c: &CubeComplex,
    r: u32,
    src: &[(usize, usize)],
    dst: &[(usize, usize)],
    twist: Option<&Laurent>,
) -> IntMatrix {
    let ru = r as usize;
    let mut m = IntMatrix::zero(dst.len() * ru, src.len() * ru);
    let dst_pos: BTreeMap<(usize, usize), usize> = dst.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    for (si, &(v, g)) in src.iter().enumerate() {
        for cr in 0..c.n() {
            if v >> cr & 1 == 1 {
                continue;
            }
            let e = c.edge(v, cr).expect("edge");
            let to = e.to;
            for (row, val) in e.matrix.column(g) {
                let Some(&di) = dst_pos.get(&(to, *row)) else { continue };
                let mut val = if e.sign { -val } else { val.clone() };
                if let Some(t) = twist {
                    val = &val * t;
                }
                let coeffs = val.to_cyclic_vec(r);
                for l in 0..ru {
                    for (e2, &cf) in coeffs.iter().enumerate() {
                        if cf != 0 {
                            *m.at_mut(di * ru + (l + e2) % ru, si * ru + l) += cf;
                        }
                    }
                }
            }
        }
    }
    m
}

/// (x^r - 1) / Φ_d as a Laurent element; multiplication by it projects onto the Φ_d part.
fn isotypic_projector(r: u32, d: u32) -> Laurent {
    let mut xr = vec![-1i64];
    xr.resize(r as usize + 1, 0);
    xr[r as usize] = 1;
    let p = poly_div(&xr, &cyclotomic(d));
    Laurent::from_terms(p.into_iter().enumerate().map(|(e, c)| (e as i64, c)))
}

/// Homology of a complex over k_r (r >= 1).
pub fn homology(c: &CubeComplex) -> HomologyTable {
    let r = match c.ring {
        Ring::Cyclotomic(r) => r,
        Ring::Integer => 1,
        Ring::Laurent => panic!("homology needs a complex over k_r; reduce it first"),
    };
    let parts: Vec<((i64, i64), BTreeMap<i64, Vec<(usize, usize)>>)> = summands(c).into_iter().collect();
    let divs = divisors(r);
    let projectors: Vec<(u32, Laurent)> = divs.iter().map(|&d| (d, isotypic_projector(r, d))).collect();
    let results: Vec<Vec<((i64, i64, i64), HomologyGroup)>> = parts
        .par_iter()
        .map(|((j, k), by_h)| {
            let empty = Vec::new();
            let hs: Vec<i64> = by_h.keys().copied().collect();
            let lo = *hs.first().unwrap();
            let hi = *hs.last().unwrap();
            let mut out = Vec::new();
            // d_h : C^h -> C^{h+1}
            let mut rank = BTreeMap::new();
            let mut factors = BTreeMap::new();
            let mut iso_rank: BTreeMap<(i64, u32), usize> = BTreeMap::new();
            for h in lo - 1..=hi {
                let src = by_h.get(&h).unwrap_or(&empty);
                let dst = by_h.get(&(h + 1)).unwrap_or(&empty);
                if src.is_empty() || dst.is_empty() {
                    rank.insert(h, 0);
                    factors.insert(h, Vec::new());
                    for &d in &divs {
                        iso_rank.insert((h, d), 0);
                    }
                    continue;
                }
                let m = unrolled(c, r, src, dst, None);
                let f = invariant_factors(&m);
                rank.insert(h, f.len());
                factors.insert(h, f);
                for (d, p) in &projectors {
                    let mp = if r == 1 { m.clone() } else { unrolled(c, r, src, dst, Some(p)) };
                    iso_rank.insert((h, *d), rank_q(&mp));
                }
            }
            for h in lo..=hi {
                let n = by_h.get(&h).map_or(0, |v| v.len()) * r as usize;
                let free = n - rank[&h] - rank[&(h - 1)];
                let torsion: Vec<String> =
                    factors[&(h - 1)].iter().filter(|x| !x.abs().is_one()).map(|x| x.abs().to_string()).collect();
                if free == 0 && torsion.is_empty() {
                    continue;
                }
                let mut mult = BTreeMap::new();
                let mut charpoly = vec![1i64];
                let gens = by_h.get(&h).map_or(0, |v| v.len());
                for &d in &divs {
                    let phi = euler_phi(d);
                    let dim = gens * phi - iso_rank[&(h, d)] - iso_rank[&(h - 1, d)];
                    assert_eq!(dim % phi, 0, "isotypic dimension not a multiple of φ(d)");
                    let m = dim / phi;
                    if m > 0 {
                        mult.insert(d, m);
                        let cy = cyclotomic(d);
                        for _ in 0..m {
                            charpoly = poly_mul(&charpoly, &cy);
                        }
                    }
                }
                assert_eq!(charpoly.len() - 1, free, "q-action dimension mismatch");
                let trace = if free == 0 { 0 } else { -charpoly[free - 1] };
                out.push((
                    (h, *j, *k),
                    HomologyGroup { free_rank: free, torsion, cyclotomic_multiplicities: mult, charpoly, trace },
                ));
            }
            out
        })
        .collect();
    HomologyTable { r, groups: results.into_iter().flatten().collect() }
}

impl HomologyTable {
    /// Canonical string: one entry per nonzero tridegree.
    pub fn fingerprint(&self) -> String {
        self.fingerprint_shifted(0, 0)
    }

    /// Fingerprint after shifting (h, j) by the given amounts.
    pub fn fingerprint_shifted(&self, dh: i64, dj: i64) -> String {
        let mut s = format!("r={}", self.r);
        for ((h, j, k), g) in &self.groups {
            write!(s, ";({},{},{}):{}", h + dh, j + dj, k, g.free_rank).unwrap();
            if !g.torsion.is_empty() {
                write!(s, "+T[{}]", g.torsion.join(",")).unwrap();
            }
            let cp: Vec<String> = g.charpoly.iter().map(|c| c.to_string()).collect();
            write!(s, "|χ=[{}]", cp.join(",")).unwrap();
        }
        s
    }

    /// Total free rank.
    pub fn total_rank(&self) -> usize {
        self.groups.values().map(|g| g.free_rank).sum()
    }

    /// JSON form with one object per nonzero tridegree, in (h, j, k) order.
    pub fn to_json(&self) -> serde_json::Value {
        let groups: Vec<serde_json::Value> = self
            .groups
            .iter()
            .map(|(&(h, j, k), g)| {
                serde_json::json!({
                    "h": h, "j": j, "k": k,
                    "free_rank": g.free_rank,
                    "torsion": g.torsion,
                    "cyclotomic_multiplicities": g.cyclotomic_multiplicities,
                    "charpoly": g.charpoly,
                    "trace": g.trace,
                })
            })
            .collect();
        serde_json::json!({ "r": self.r, "groups": groups })
    }

    /// Aligned text grid, one line per nonzero tridegree.
    pub fn render_text(&self) -> String {
        let mut s = format!("{:>4} {:>4} {:>4}  {:>5}  {:<12} {}\n", "h", "j", "k", "rank", "torsion", "charpoly(q)");
        for ((h, j, k), g) in &self.groups {
            let tors = if g.torsion.is_empty() { "-".to_string() } else { g.torsion.iter().map(|t| format!("Z/{t}")).collect::<Vec<_>>().join("+") };
            let cp = Laurent::from_terms(g.charpoly.iter().enumerate().map(|(e, &c)| (e as i64, c)));
            writeln!(s, "{h:>4} {j:>4} {k:>4}  {:>5}  {:<12} {}", g.free_rank, tors, cp.to_string().replace('q', "x")).unwrap();
        }
        s
    }
}

/// Rank over Q of every differential block, computed by plain rational
/// Gaussian elimination, independently of the Smith form path.
pub fn free_ranks_by_gauss(c: &CubeComplex) -> BTreeMap<(i64, i64, i64), usize> {
    use num_rational::BigRational;
    let r = match c.ring {
        Ring::Cyclotomic(r) => r,
        _ => 1,
    };
    let gauss_rank = |m: &IntMatrix| -> usize {
        let mut a: Vec<Vec<BigRational>> = (0..m.rows)
            .map(|i| (0..m.cols).map(|j| BigRational::from_integer(m.at(i, j).clone())).collect())
            .collect();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&i| !a[i][col].is_zero()) else { continue };
            a.swap(rank, p);
            let piv = a[rank][col].clone();
            for i in 0..m.rows {
                if i != rank && !a[i][col].is_zero() {
                    let f = &a[i][col] / &piv;
                    for j in col..m.cols {
                        let v = &f * &a[rank][j];
                        a[i][j] -= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    };
    let mut out = BTreeMap::new();
    for ((j, k), by_h) in summands(c) {
        let empty = Vec::new();
        let hs: Vec<i64> = by_h.keys().copied().collect();
        let mut rk = BTreeMap::new();
        for h in hs[0] - 1..=*hs.last().unwrap() {
            let src = by_h.get(&h).unwrap_or(&empty);
            let dst = by_h.get(&(h + 1)).unwrap_or(&empty);
            let v = if src.is_empty() || dst.is_empty() { 0 } else { gauss_rank(&unrolled(c, r, src, dst, None)) };
            rk.insert(h, v);
        }
        for (&h, gens) in &by_h {
            let free = gens.len() * r as usize - rk[&h] - rk[&(h - 1)];
            if free > 0 {
                out.insert((h, j, k), free);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_hand_example() {
        let m = IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        let s = smith_normal_form(&m);
        assert_eq!(s.invariant_factors(), vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
    }

    #[test]
    fn snf_identity_and_zero() {
        let id = IntMatrix::identity(3);
        assert_eq!(invariant_factors(&id), vec![BigInt::one(); 3]);
        let z = IntMatrix::zero(2, 3);
        let s = smith_normal_form(&z);
        assert!(s.invariant_factors().is_empty());
        assert_eq!(s.d, z);
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(2), vec![1, 1]);
        assert_eq!(cyclotomic(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
    }

    #[test]
    fn rank_matches_factor_count() {
        let m = IntMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(rank_q(&m), 2);
        assert_eq!(invariant_factors(&m).len(), 2);
    }
}
