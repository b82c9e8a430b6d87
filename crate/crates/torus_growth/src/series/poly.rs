//! Integer polynomials and rational functions in t, with power-series expansion,
//! recurrence recovery and fraction-free linear solving over Z[t].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Dense ascending coefficients; no trailing zeros, so zero is the empty vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PolyT {
    coeffs: Vec<BigInt>,
}

impl PolyT {
    pub fn zero() -> Self {
        PolyT::default()
    }

    pub fn one() -> Self {
        PolyT::monomial(0, 1)
    }

    /// c t^e.
    pub fn monomial(e: usize, c: i64) -> Self {
        let mut coeffs = vec![BigInt::zero(); e + 1];
        coeffs[e] = BigInt::from(c);
        PolyT::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyT { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        PolyT::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, e: usize) -> BigInt {
        self.coeffs.get(e).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn scale(&self, s: &BigInt) -> PolyT {
        PolyT::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiply by t^e.
    pub fn shift(&self, e: usize) -> PolyT {
        if self.is_zero() {
            return PolyT::zero();
        }
        let mut coeffs = vec![BigInt::zero(); e];
        coeffs.extend(self.coeffs.iter().cloned());
        PolyT { coeffs }
    }

    /// Terms of degree <= n.
    pub fn truncate(&self, n: usize) -> PolyT {
        PolyT::from_coeffs(self.coeffs.iter().take(n + 1).cloned().collect())
    }

    /// gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Exact quotient by `d`, or `None` when `d` does not divide `self` in Z[t].
    pub fn div_exact(&self, d: &PolyT) -> Option<PolyT> {
        let dl = d.leading()?;
        let dd = d.degree()?;
        let mut rem = self.coeffs.clone();
        if rem.len() < d.coeffs.len() {
            return self.is_zero().then(PolyT::zero);
        }
        let mut q = vec![BigInt::zero(); rem.len() - dd];
        for i in (0..q.len()).rev() {
            let top = &rem[i + dd];
            if top.is_zero() {
                continue;
            }
            let (qi, r) = top.div_rem(dl);
            if !r.is_zero() {
                return None;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                rem[i + j] -= &qi * dj;
            }
            q[i] = qi;
        }
        rem.iter().all(|c| c.is_zero()).then(|| PolyT::from_coeffs(q))
    }

    pub fn eval_i64(&self, t: i64) -> BigInt {
        let t = BigInt::from(t);
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &t + c)
    }
}

impl Add for &PolyT {
    type Output = PolyT;
    fn add(self, o: &PolyT) -> PolyT {
        let n = self.coeffs.len().max(o.coeffs.len());
        PolyT::from_coeffs((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &PolyT {
    type Output = PolyT;
    fn sub(self, o: &PolyT) -> PolyT {
        let n = self.coeffs.len().max(o.coeffs.len());
        PolyT::from_coeffs((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &PolyT {
    type Output = PolyT;
    fn mul(self, o: &PolyT) -> PolyT {
        if self.is_zero() || o.is_zero() {
            return PolyT::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyT::from_coeffs(out)
    }
}

impl Neg for &PolyT {
    type Output = PolyT;
    fn neg(self) -> PolyT {
        PolyT { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl fmt::Display for PolyT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (e, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => f.write_str("t")?,
                (1, false) => write!(f, "{a}t")?,
                (_, true) => write!(f, "t^{e}")?,
                (_, false) => write!(f, "{a}t^{e}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for PolyT {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

/// numerator / denominator with the common content removed and a positive
/// leading denominator coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalT {
    pub numerator: PolyT,
    pub denominator: PolyT,
}

impl RationalT {
    pub fn new(numerator: PolyT, denominator: PolyT) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::Singular("zero denominator"));
        }
        let g = numerator.content().gcd(&denominator.content());
        let mut g = if g.is_zero() { BigInt::one() } else { g };
        if denominator.leading().is_some_and(|l| l.is_negative()) {
            g = -g;
        }
        let div = |p: &PolyT| PolyT::from_coeffs(p.coeffs.iter().map(|c| c / &g).collect());
        Ok(RationalT { numerator: div(&numerator), denominator: div(&denominator) })
    }

    pub fn from_poly(p: PolyT) -> Self {
        RationalT { numerator: p, denominator: PolyT::one() }
    }

    pub fn expand(&self, n: usize) -> Result<Vec<BigInt>> {
        expand_coeffs(self, n)
    }

    pub fn add(&self, o: &RationalT) -> Result<RationalT> {
        if self.denominator == o.denominator {
            return RationalT::new(&self.numerator + &o.numerator, self.denominator.clone());
        }
        RationalT::new(
            &(&self.numerator * &o.denominator) + &(&o.numerator * &self.denominator),
            &self.denominator * &o.denominator,
        )
    }

    pub fn mul(&self, o: &RationalT) -> Result<RationalT> {
        RationalT::new(&self.numerator * &o.numerator, &self.denominator * &o.denominator)
    }
}

impl fmt::Display for RationalT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

/// First n + 1 Taylor coefficients of `r` at t = 0, by long division.
pub fn expand_coeffs(r: &RationalT, n: usize) -> Result<Vec<BigInt>> {
    let d0 = r.denominator.coeff(0);
    if d0.is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    let mut out: Vec<BigInt> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut acc = r.numerator.coeff(i);
        for (j, dj) in r.denominator.coeffs().iter().enumerate().skip(1).take(i) {
            acc -= dj * &out[i - j];
        }
        let (q, rem) = acc.div_rem(&d0);
        if !rem.is_zero() {
            return Err(Error::Assembly(format!("coefficient {i} is not integral")));
        }
        out.push(q);
    }
    Ok(out)
}

/// Shortest linear recurrence of `seq` over Q (Berlekamp-Massey): the connection polynomial
/// 1 + c_1 t + ... scaled to coprime integers, and the recurrence length L.
pub fn berlekamp_massey(seq: &[BigInt]) -> (PolyT, usize) {
    let s: Vec<BigRational> = seq.iter().map(|x| BigRational::from_integer(x.clone())).collect();
    let mut c = vec![BigRational::one()];
    let mut b = vec![BigRational::one()];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bd = BigRational::one();
    for i in 0..s.len() {
        let mut disc = s[i].clone();
        for j in 1..=l {
            if j < c.len() {
                disc += &c[j] * &s[i - j];
            }
        }
        if disc.is_zero() {
            m += 1;
            continue;
        }
        let coef = &disc / &bd;
        let old = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, BigRational::zero());
        }
        for (j, bj) in b.iter().enumerate() {
            c[j + m] -= &coef * bj;
        }
        if 2 * l <= i {
            l = i + 1 - l;
            b = old;
            bd = disc;
            m = 1;
        } else {
            m += 1;
        }
    }
    c.truncate(l + 1);
    let lcm = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = c.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let p = PolyT::from_coeffs(ints);
    let g = p.content();
    (PolyT::from_coeffs(p.coeffs.iter().map(|x| x / &g).collect()), l)
}

/// Rational function reproducing every term of `seq`, recovered from its shortest recurrence.
/// Requires `margin` terms beyond twice the recurrence order so the fit is over-determined.
pub fn fit_rational(seq: &[BigInt], margin: usize) -> Result<RationalT> {
    let (den, order) = berlekamp_massey(seq);
    if 2 * order + margin > seq.len() {
        return Err(Error::Assembly(format!(
            "recurrence of order {order} is not determined by {} terms",
            seq.len()
        )));
    }
    let s = PolyT::from_coeffs(seq.to_vec());
    let num = if order == 0 { PolyT::zero() } else { (&den * &s).truncate(order - 1) };
    let r = RationalT::new(num, den)?;
    let check = expand_coeffs(&r, seq.len() - 1)?;
    if check != seq {
        return Err(Error::Assembly("recovered rational function does not reproduce the series".into()));
    }
    Ok(r)
}

/// Solve `a x = b` over Z[t] by fraction-free Gauss-Jordan elimination.
/// Returns (det a, X) with a X = det a * b.
pub fn bareiss_solve(a: &[Vec<PolyT>], b: &[Vec<PolyT>]) -> Result<(PolyT, Vec<Vec<PolyT>>)> {
    let n = a.len();
    let w = b.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<PolyT>> = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb.iter()).cloned().collect())
        .collect();
    let mut prev = PolyT::one();
    let mut sign = 1i64;
    for k in 0..n {
        let piv = (k..n).find(|&i| !m[i][k].is_zero()).ok_or(Error::Singular("matrix is singular over Q(t)"))?;
        if piv != k {
            m.swap(piv, k);
            sign = -sign;
        }
        let pk = m[k][k].clone();
        for i in 0..n {
            if i == k {
                continue;
            }
            let aik = m[i][k].clone();
            for j in 0..n + w {
                if j == k {
                    continue;
                }
                let v = &(&pk * &m[i][j]) - &(&aik * &m[k][j]);
                m[i][j] = v.div_exact(&prev).ok_or(Error::Singular("inexact fraction-free step"))?;
            }
            m[i][k] = PolyT::zero();
        }
        prev = pk;
    }
    // Every diagonal entry now equals the last pivot, which is det(a) up to the swap sign.
    let det = prev.scale(&BigInt::from(sign));
    let x: Vec<Vec<PolyT>> = m.iter().map(|row| row[n..].iter().map(|p| p.scale(&BigInt::from(sign))).collect()).collect();
    for (i, row) in m.iter().enumerate() {
        if row[i].scale(&BigInt::from(sign)) != det {
            return Err(Error::Singular("diagonal entries disagree after elimination"));
        }
    }
    Ok((det, x))
}

/// Matrix product over Z[t].
pub fn mat_mul(a: &[Vec<PolyT>], b: &[Vec<PolyT>]) -> Vec<Vec<PolyT>> {
    let w = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..w)
                .map(|j| row.iter().zip(b).fold(PolyT::zero(), |acc, (x, rb)| &acc + &(x * &rb[j])))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn expansion_examples() {
        let r = RationalT::new(PolyT::one(), PolyT::from_i64(&[1, -1])).unwrap();
        assert_eq!(expand_coeffs(&r, 3).unwrap(), big(&[1, 1, 1, 1]));
        let r = RationalT::new(PolyT::from_i64(&[1, 1]), PolyT::from_i64(&[1, -2, 1])).unwrap();
        assert_eq!(expand_coeffs(&r, 3).unwrap(), big(&[1, 3, 5, 7]));
        let r = RationalT::new(PolyT::one(), PolyT::from_i64(&[0, 1])).unwrap();
        assert_eq!(expand_coeffs(&r, 3), Err(Error::ZeroConstantTerm));
    }

    #[test]
    fn normalization() {
        let r = RationalT::new(PolyT::from_i64(&[2, 4]), PolyT::from_i64(&[-2, 0, -6])).unwrap();
        assert_eq!(r.numerator, PolyT::from_i64(&[-1, -2]));
        assert_eq!(r.denominator, PolyT::from_i64(&[1, 0, 3]));
    }

    #[test]
    fn exact_division() {
        let a = PolyT::from_i64(&[1, -1]);
        let b = PolyT::from_i64(&[2, 3, 1]);
        assert_eq!((&a * &b).div_exact(&a), Some(b.clone()));
        assert_eq!(b.div_exact(&a), None);
        assert_eq!(PolyT::zero().div_exact(&a), Some(PolyT::zero()));
    }

    #[test]
    fn fit_recovers_rational_function() {
        let r = RationalT::new(PolyT::from_i64(&[1, 2, -1]), PolyT::from_i64(&[1, -3, 1, 1])).unwrap();
        let seq = expand_coeffs(&r, 30).unwrap();
        assert_eq!(fit_rational(&seq, 8).unwrap(), r);
        let poly = big(&[1, 6, 22]);
        let r = fit_rational(&[poly.clone(), vec![BigInt::zero(); 10]].concat(), 4).unwrap();
        assert_eq!(expand_coeffs(&r, 2).unwrap(), poly);
    }

    #[test]
    fn bareiss_inverts() {
        let t = PolyT::monomial(1, 1);
        let one = PolyT::one();
        let a = vec![vec![&one - &t, -&t], vec![t.clone(), one.clone()]];
        let b = vec![vec![one.clone()], vec![PolyT::zero()]];
        let (det, x) = bareiss_solve(&a, &b).unwrap();
        assert_eq!(det, PolyT::from_i64(&[1, -1, 1]));
        let ax = mat_mul(&a, &x);
        assert_eq!(ax[0][0], det);
        assert!(ax[1][0].is_zero());
    }

    #[test]
    fn display() {
        assert_eq!(PolyT::from_i64(&[1, -1, 0, 3]).to_string(), "1 - t + 3t^3");
        assert_eq!(PolyT::zero().to_string(), "0");
    }
}
