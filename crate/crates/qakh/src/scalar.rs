//! Laurent polynomials in q and their reductions modulo q^r - 1.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Element of Z[q, q^-1]; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Laurent {
    terms: BTreeMap<i64, i64>,
}

impl Laurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn q() -> Self {
        Self::monomial(1, 1)
    }

    /// `c * q^e`.
    pub fn monomial(c: i64, e: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(e, c);
        }
        Self { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, i64)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (e, c) in it {
            out.add_term(c, e);
        }
        out
    }

    pub fn add_term(&mut self, c: i64, e: i64) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// (exponent, coefficient) pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// `Some((c, e))` when the element is a single term `c q^e`.
    pub fn as_monomial(&self) -> Option<(i64, i64)> {
        if self.terms.len() == 1 {
            let (&e, &c) = self.terms.iter().next().unwrap();
            Some((c, e))
        } else {
            None
        }
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Multiply by q^k.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            terms: self.terms.iter().map(|(&e, &c)| (e + k, c)).collect(),
        }
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::from_terms(self.terms().map(|(e, x)| (e, x * c)))
    }

    /// Substitute q = 1.
    pub fn eval_one(&self) -> i64 {
        self.terms.values().sum()
    }

    /// Canonical representative modulo q^r - 1, exponents in 0..r.
    /// `r = 0` leaves the element untouched.
    pub fn reduce(&self, r: u32) -> Self {
        if r == 0 {
            return self.clone();
        }
        let r = r as i64;
        Self::from_terms(self.terms().map(|(e, c)| (e.rem_euclid(r), c)))
    }

    /// Coefficient vector of length r for a reduced element.
    pub fn to_cyclic_vec(&self, r: u32) -> Vec<i64> {
        let mut v = vec![0; r as usize];
        for (e, c) in self.reduce(r).terms() {
            v[e as usize] += c;
        }
        v
    }

    /// q -> q^-1.
    pub fn bar(&self) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (-e, c)))
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, &c) in self.terms.iter().rev() {
            let sign = if c < 0 { "-" } else { "+" };
            let a = c.abs();
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (a, e) {
                (_, 0) => write!(f, "{a}")?,
                (1, 1) => write!(f, "q")?,
                (1, _) => write!(f, "q^{e}")?,
                (_, 1) => write!(f, "{a}q")?,
                _ => write!(f, "{a}q^{e}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Laurent {
    type Output = Laurent;
    fn add(mut self, rhs: Laurent) -> Laurent {
        self += &rhs;
        self
    }
}

impl AddAssign<&Laurent> for Laurent {
    fn add_assign(&mut self, rhs: &Laurent) {
        for (e, c) in rhs.terms() {
            self.add_term(c, e);
        }
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        self + &(-rhs)
    }
}

impl Sub for Laurent {
    type Output = Laurent;
    fn sub(self, rhs: Laurent) -> Laurent {
        &self - &rhs
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        self.scale(-1)
    }
}

impl Neg for Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        self.scale(-1)
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(c1 * c2, e1 + e2);
            }
        }
        out
    }
}

impl Mul for Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Laurent) -> Laurent {
        &self * &rhs
    }
}

/// Element of k_r = Z[q]/(q^r - 1) stored as its coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cyclotomic {
    r: u32,
    coeffs: Vec<i64>,
}

impl Cyclotomic {
    pub fn zero(r: u32) -> Self {
        assert!(r >= 1, "k_r needs r >= 1");
        Self { r, coeffs: vec![0; r as usize] }
    }

    pub fn from_laurent(x: &Laurent, r: u32) -> Self {
        assert!(r >= 1, "k_r needs r >= 1");
        Self { r, coeffs: x.to_cyclic_vec(r) }
    }

    pub fn monomial(c: i64, e: i64, r: u32) -> Self {
        Self::from_laurent(&Laurent::monomial(c, e), r)
    }

    pub fn modulus(&self) -> u32 {
        self.r
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn to_laurent(&self) -> Laurent {
        Laurent::from_terms(self.coeffs.iter().enumerate().map(|(e, &c)| (e as i64, c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.r, other.r);
        Self {
            r: self.r,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.r, other.r);
        let r = self.r as usize;
        let mut coeffs = vec![0; r];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[(i + j) % r] += a * b;
            }
        }
        Self { r: self.r, coeffs }
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_laurent())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_value_squared() {
        let c = Laurent::from_terms([(1, 1), (-1, 1)]);
        let sq = &c * &c;
        assert_eq!(sq, Laurent::from_terms([(2, 1), (0, 2), (-2, 1)]));
        assert_eq!(sq.to_string(), "q^2 + 2 + q^-2");
    }

    #[test]
    fn reduction_is_a_ring_map() {
        let a = Laurent::from_terms([(-3, 2), (4, -1), (1, 5)]);
        let b = Laurent::from_terms([(7, 1), (-1, -2)]);
        for r in 1..6 {
            let lhs = (&a * &b).reduce(r);
            let rhs = (&a.reduce(r) * &b.reduce(r)).reduce(r);
            assert_eq!(lhs, rhs);
            let ca = Cyclotomic::from_laurent(&a, r);
            let cb = Cyclotomic::from_laurent(&b, r);
            assert_eq!(ca.mul(&cb).to_laurent(), lhs);
        }
    }

    #[test]
    fn cancellation_drops_terms() {
        let mut a = Laurent::monomial(3, 2);
        a.add_term(-3, 2);
        assert!(a.is_zero());
        assert_eq!(Laurent::monomial(-1, 5).reduce(3), Laurent::monomial(-1, 2));
        assert_eq!(Laurent::monomial(1, -1).reduce(3), Laurent::monomial(1, 2));
    }
}
