//! Column-sparse matrices over Z[q, q^-1].

use crate::scalar::Laurent;
use serde::Serialize;
use std::collections::BTreeMap;

/// Column j holds the image of basis vector j as (row, entry) pairs sorted by row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LMatrix {
    pub rows: usize,
    pub cols: usize,
    columns: Vec<Vec<(usize, Laurent)>>,
}

impl LMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.columns[i].push((i, Laurent::one()));
        }
        m
    }

    pub fn from_columns(rows: usize, cols: Vec<BTreeMap<usize, Laurent>>) -> Self {
        let columns = cols
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .filter(|(r, v)| {
                        assert!(*r < rows, "row index out of range");
                        !v.is_zero()
                    })
                    .collect()
            })
            .collect::<Vec<_>>();
        Self { rows, cols: columns.len(), columns }
    }

    pub fn diagonal(entries: Vec<Laurent>) -> Self {
        let n = entries.len();
        let mut m = Self::zero(n, n);
        for (i, e) in entries.into_iter().enumerate() {
            if !e.is_zero() {
                m.columns[i].push((i, e));
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> &[(usize, Laurent)] {
        &self.columns[j]
    }

    pub fn get(&self, i: usize, j: usize) -> Laurent {
        self.columns[j]
            .binary_search_by_key(&i, |e| e.0)
            .map(|p| self.columns[j][p].1.clone())
            .unwrap_or_default()
    }

    /// Nonzero entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Laurent)> + '_ {
        self.columns.iter().enumerate().flat_map(|(j, c)| c.iter().map(move |(i, v)| (*i, j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }

    pub fn map_entries<F: Fn(&Laurent) -> Laurent>(&self, f: F) -> Self {
        let cols = self
            .columns
            .iter()
            .map(|c| c.iter().map(|(i, v)| (*i, f(v))).collect::<BTreeMap<_, _>>())
            .collect();
        Self::from_columns(self.rows, cols)
    }

    pub fn reduce(&self, r: u32) -> Self {
        self.map_entries(|v| v.reduce(r))
    }

    pub fn scale(&self, s: &Laurent) -> Self {
        self.map_entries(|v| v * s)
    }

    /// `self * rhs`, i.e. apply `rhs` first.
    pub fn mul(&self, rhs: &LMatrix) -> LMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let cols = rhs
            .columns
            .iter()
            .map(|c| {
                let mut acc: BTreeMap<usize, Laurent> = BTreeMap::new();
                for (k, a) in c {
                    for (i, b) in &self.columns[*k] {
                        *acc.entry(*i).or_default() += &(b * a);
                    }
                }
                acc
            })
            .collect();
        Self::from_columns(self.rows, cols)
    }

    pub fn add(&self, rhs: &LMatrix) -> LMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let cols = (0..self.cols)
            .map(|j| {
                let mut acc: BTreeMap<usize, Laurent> = self.columns[j].iter().cloned().collect();
                for (i, v) in &rhs.columns[j] {
                    *acc.entry(*i).or_default() += v;
                }
                acc
            })
            .collect();
        Self::from_columns(self.rows, cols)
    }

    pub fn neg(&self) -> LMatrix {
        self.map_entries(|v| -v)
    }

    pub fn sub(&self, rhs: &LMatrix) -> LMatrix {
        self.add(&rhs.neg())
    }

    /// Substitute q = 1, as integers.
    pub fn eval_one(&self) -> Vec<(usize, usize, i64)> {
        self.entries().map(|(i, j, v)| (i, j, v.eval_one())).filter(|e| e.2 != 0).collect()
    }
}
