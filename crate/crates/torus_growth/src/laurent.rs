//! Laurent-polynomial representatives, the n-length, and the relation ideal.
//!
//! F represents x in Z^2 when x = F(T) b. Coefficients stay small under the
//! rewriting system, so they are stored as i64; evaluation is exact in BigInt.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_core::GroupParams;

/// Finitely supported map degree -> nonzero coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, i64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn constant(c: i64) -> Self {
        LaurentPoly::monomial(0, c)
    }

    pub fn monomial(deg: i64, c: i64) -> Self {
        let mut p = LaurentPoly::zero();
        p.add_term(deg, c);
        p
    }

    /// Coefficients in ascending degree starting at `lo`; zeros are dropped.
    pub fn from_ascending(lo: i64, coeffs: &[i64]) -> Self {
        let mut p = LaurentPoly::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(lo + i as i64, c);
        }
        p
    }

    /// Polynomial with coefficients (c_0, ..., c_m).
    pub fn from_poly(coeffs: &[i64]) -> Self {
        LaurentPoly::from_ascending(0, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, deg: i64) -> i64 {
        self.coeffs.get(&deg).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, deg: i64, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry(deg).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&deg);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.coeffs.iter().map(|(&d, &c)| (d, c))
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn leading_coeff(&self) -> i64 {
        self.coeffs.values().next_back().copied().unwrap_or(0)
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    /// self + s * other.
    pub fn add_scaled(&self, other: &LaurentPoly, s: i64) -> LaurentPoly {
        let mut out = self.clone();
        for (d, c) in other.terms() {
            out.add_term(d, s * c);
        }
        out
    }

    pub fn scale(&self, s: i64) -> LaurentPoly {
        if s == 0 {
            return LaurentPoly::zero();
        }
        LaurentPoly { coeffs: self.coeffs.iter().map(|(&d, &c)| (d, s * c)).collect() }
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(&d, &c)| (d, -c)).collect() }
    }

    /// X^s * self.
    pub fn shift(&self, s: i64) -> LaurentPoly {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(&d, &c)| (d + s, c)).collect() }
    }

    /// Degrees >= 0.
    pub fn polynomial_part(&self) -> LaurentPoly {
        LaurentPoly { coeffs: self.coeffs.range(0..).map(|(&d, &c)| (d, c)).collect() }
    }

    /// Degrees <= -1.
    pub fn principal_part(&self) -> LaurentPoly {
        LaurentPoly { coeffs: self.coeffs.range(..0).map(|(&d, &c)| (d, c)).collect() }
    }

    /// X^-1 F(X^-1): degree e goes to -e-1. Involution exchanging the two parts.
    pub fn mirror(&self) -> LaurentPoly {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(&d, &c)| (-d - 1, c)).collect() }
    }

    /// Dense (c_0, ..., c_m) of the polynomial part; empty for no polynomial part.
    pub fn poly_digits(&self) -> Vec<i64> {
        match self.max_degree() {
            Some(m) if m >= 0 => (0..=m).map(|d| self.coeff(d)).collect(),
            _ => Vec::new(),
        }
    }

    pub fn to_word(&self) -> Option<CoeffWord> {
        let (lo, hi) = (self.min_degree()?, self.max_degree()?);
        Some(CoeffWord { lead_degree: hi, coeffs: (lo..=hi).rev().map(|d| self.coeff(d)).collect() })
    }
}

impl fmt::Display for LaurentPoly {
    /// `lo=<low degree>;c_lo,...,c_hi`, zero as `lo=0;0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = match (self.min_degree(), self.max_degree()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return write!(f, "lo=0;0"),
        };
        write!(f, "lo={lo};")?;
        for d in lo..=hi {
            if d > lo {
                write!(f, ",")?;
            }
            write!(f, "{}", self.coeff(d))?;
        }
        Ok(())
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for LaurentPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse { text: s.to_string(), reason: reason.to_string() };
        let (head, body) = s.split_once(';').ok_or_else(|| err("missing ';'"))?;
        let lo = head
            .trim()
            .strip_prefix("lo=")
            .ok_or_else(|| err("expected lo=<degree>"))?
            .trim()
            .parse::<i64>()
            .map_err(|e| err(&e.to_string()))?;
        let coeffs = body
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| err(&e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(LaurentPoly::from_ascending(lo, &coeffs))
    }
}

/// Dense coefficient string (c_m, ..., c_low) in descending degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CoeffWord {
    pub lead_degree: i64,
    pub coeffs: Vec<i64>,
}

impl CoeffWord {
    pub fn new(lead_degree: i64, coeffs: Vec<i64>) -> Self {
        CoeffWord { lead_degree, coeffs }
    }

    /// The word of a polynomial given as (c_0, ..., c_m).
    pub fn from_ascending(coeffs: &[i64]) -> Self {
        CoeffWord { lead_degree: coeffs.len() as i64 - 1, coeffs: coeffs.iter().rev().copied().collect() }
    }

    pub fn low_degree(&self) -> i64 {
        self.lead_degree - self.coeffs.len() as i64 + 1
    }

    /// Coefficient at `deg`, zero outside the word.
    pub fn at(&self, deg: i64) -> i64 {
        let i = self.lead_degree - deg;
        if i < 0 || i >= self.coeffs.len() as i64 {
            0
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Contiguous degrees [low, high].
    pub fn subword(&self, low: i64, high: i64) -> CoeffWord {
        CoeffWord { lead_degree: high, coeffs: (low..=high).rev().map(|d| self.at(d)).collect() }
    }
}

/// Excursion extents p (below) and q (above) of the n-length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NLengthBounds {
    pub p: u64,
    pub q: u64,
}

/// Sum of c_j T^j b.
pub fn evaluate_rep(params: &GroupParams, f: &LaurentPoly) -> [BigInt; 2] {
    let t = params.matrix();
    let ti = params.inverse_matrix();
    let step = |m: &[[i64; 2]; 2], v: [BigInt; 2], c: i64| -> [BigInt; 2] {
        [&v[0] * m[0][0] + &v[1] * m[0][1], &v[0] * m[1][0] + &v[1] * m[1][1] + c]
    };
    let mut pos = [BigInt::from(0), BigInt::from(0)];
    if let Some(hi) = f.max_degree().filter(|&h| h >= 0) {
        for d in (0..=hi).rev() {
            pos = step(&t, pos, f.coeff(d));
        }
    }
    let mut neg = [BigInt::from(0), BigInt::from(0)];
    if let Some(lo) = f.min_degree().filter(|&l| l < 0) {
        for d in lo..0 {
            neg = step(&ti, neg, f.coeff(d));
        }
        neg = step(&ti, neg, 0);
    }
    [&pos[0] + &neg[0], &pos[1] + &neg[1]]
}

/// L_n(F) = 2p + 2q - |n| + sum |c_j|.
pub fn n_length(f: &LaurentPoly, n: i64) -> (u64, NLengthBounds) {
    let mut p = (-n).max(0);
    let mut q = n.max(0);
    let mut abs_sum = 0i64;
    for (d, c) in f.terms() {
        if d >= 0 {
            q = q.max(d);
        } else {
            p = p.max(-d - 1);
        }
        abs_sum += c.abs();
    }
    let len = 2 * p + 2 * q - n.abs() + abs_sum;
    (len as u64, NLengthBounds { p: p as u64, q: q as u64 })
}

/// A representative of `x` with every |c_j| <= k+1, obtained from x1 + x0 X^-1 by carrying
/// round(c_j / (2k+1)) X^(j-1) (X^2 - (2k+1) X + 1) out of each large coefficient.
/// Each carry lowers the coefficient sum of absolute values, so the loop terminates.
pub fn balanced_representative(params: &GroupParams, x: &[BigInt; 2]) -> Result<LaurentPoly> {
    use num_traits::ToPrimitive;
    let small = |v: &BigInt| v.to_i64().filter(|c| c.abs() < i64::MAX / 4).ok_or(Error::Overflow("representative coefficient"));
    let mut f = LaurentPoly::from_ascending(-1, &[small(&x[0])?, small(&x[1])?]);
    let d = params.d();
    let k = params.k() as i64;
    while let Some((j, c)) = f.terms().filter(|&(_, c)| c.abs() >= k + 2).max_by_key(|&(_, c)| c.abs()) {
        let q = (2 * c + d * c.signum()) / (2 * d);
        f = f.add_scaled(&relation_shift(params, j - 1), q);
    }
    Ok(f)
}

/// X^d (X^2 - (2k+1) X + 1).
pub fn relation_shift(params: &GroupParams, d: i64) -> LaurentPoly {
    LaurentPoly::from_ascending(d, &[1, -params.d(), 1])
}

/// -X^d (1 + X + ... + X^run)(X^2 - (2k+1) X + 1), the string (-1, 2k, 2k-1, ..., 2k-1, 2k, -1).
pub fn long_relation(params: &GroupParams, d: i64, run: u32) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for j in 0..=run as i64 {
        out = out.add_scaled(&relation_shift(params, d + j), -1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> GroupParams {
        GroupParams::new(2).unwrap()
    }

    fn v(a: i64, b: i64) -> [BigInt; 2] {
        [BigInt::from(a), BigInt::from(b)]
    }

    #[test]
    fn evaluate_examples() {
        let p = p2();
        assert_eq!(evaluate_rep(&p, &LaurentPoly::constant(1)), v(0, 1));
        assert_eq!(evaluate_rep(&p, &LaurentPoly::monomial(1, 1)), v(-1, 5));
        assert_eq!(evaluate_rep(&p, &LaurentPoly::monomial(-1, 1)), v(1, 0));
        assert_eq!(evaluate_rep(&p, &LaurentPoly::monomial(-2, 1)), v(5, -1));
    }

    #[test]
    fn n_length_examples() {
        assert_eq!(n_length(&LaurentPoly::constant(1), 0), (1, NLengthBounds { p: 0, q: 0 }));
        assert_eq!(n_length(&LaurentPoly::monomial(1, 1), 1).0, 2);
        assert_eq!(n_length(&LaurentPoly::monomial(1, 1), 0).0, 3);
        assert_eq!(n_length(&LaurentPoly::monomial(-1, 1), 0), (1, NLengthBounds { p: 0, q: 0 }));
        assert_eq!(n_length(&LaurentPoly::zero(), -3).0, 3);
        assert_eq!(n_length(&LaurentPoly::zero(), 0).0, 0);
    }

    #[test]
    fn relations() {
        let p = p2();
        assert_eq!(relation_shift(&p, 0), LaurentPoly::from_poly(&[1, -5, 1]));
        assert_eq!(relation_shift(&p, -1), LaurentPoly::from_ascending(-1, &[1, -5, 1]));
        assert_eq!(long_relation(&p, 0, 0), LaurentPoly::from_poly(&[-1, 5, -1]));
        assert_eq!(long_relation(&p, 0, 1), LaurentPoly::from_poly(&[-1, 4, 4, -1]));
        assert_eq!(long_relation(&p, 0, 2), LaurentPoly::from_poly(&[-1, 4, 3, 4, -1]));
        assert_eq!(evaluate_rep(&p, &long_relation(&p, -3, 5)), v(0, 0));
        let f = LaurentPoly::from_poly(&[3, 0, -2]);
        let r = relation_shift(&p, 0);
        assert_eq!(f.add_scaled(&r, 1).add_scaled(&r, -1), f);
    }

    #[test]
    fn text_format() {
        let f: LaurentPoly = "lo=-1; 1,-1,1".parse().unwrap();
        assert_eq!(f, LaurentPoly::from_ascending(-1, &[1, -1, 1]));
        assert_eq!(f.to_string(), "lo=-1;1,-1,1");
        let g: LaurentPoly = "lo=2;0,0,3,0".parse().unwrap();
        assert_eq!(g.to_string(), "lo=4;3");
        assert_eq!(LaurentPoly::zero().to_string(), "lo=0;0");
        assert!("4".parse::<LaurentPoly>().is_err());
        assert!("lo=x;4".parse::<LaurentPoly>().is_err());
    }

    #[test]
    fn mirror_is_involution() {
        let f = LaurentPoly::from_ascending(-3, &[1, 0, 2, -1, 4]);
        assert_eq!(f.mirror().mirror(), f);
        assert_eq!(f.mirror().principal_part(), f.polynomial_part().mirror());
    }

    #[test]
    fn words() {
        let w = CoeffWord::from_ascending(&[0, -2, -2, 1]);
        assert_eq!(w.lead_degree, 3);
        assert_eq!(w.coeffs, vec![1, -2, -2, 0]);
        assert_eq!(w.at(5), 0);
        assert_eq!(w.subword(1, 2).coeffs, vec![-2, -2]);
    }

    #[test]
    fn balanced_representatives() {
        let p = p2();
        for (a, b) in [(0, 0), (1, 0), (-15, 69), (-60605, 12649), (123456789, -987654321)] {
            let x = [BigInt::from(a), BigInt::from(b)];
            let f = balanced_representative(&p, &x).unwrap();
            assert_eq!(evaluate_rep(&p, &f), x);
            assert!(f.terms().all(|(_, c)| c.abs() <= 3), "{f}");
        }
    }
}
