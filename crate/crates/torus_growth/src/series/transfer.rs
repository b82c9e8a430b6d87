//! Class-by-class length generating functions of n-reduced polynomials.
//!
//! Exact counts come from the product of the reducedness automaton with the
//! classification transducer. The 12 x 12 block matrix of the degree recursion
//! is built separately so it can be compared against those counts.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::poly::{bareiss_solve, fit_rational, mat_mul, PolyT, RationalT};
use crate::error::{Error, Result};
use crate::reduction::automaton::{Regime, RuleAutomaton};
use crate::successor::{ClassState, ClassTag};

/// Twelve entries ordered S+, S0, S-, U0, U-1, U-2, Ut-3, Ut-4, Ut-5, E1, E2, E3.
pub type ClassVector = Vec<PolyT>;

pub type Matrix = Vec<Vec<PolyT>>;

fn t_pow(e: i64) -> PolyT {
    PolyT::monomial(e as usize, 1)
}

fn zero_vector() -> ClassVector {
    vec![PolyT::zero(); 12]
}

/// Degree-0 vector and the E block of the degree-1 vector, including the level factor t^|n|.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseVectors {
    pub degree0: ClassVector,
    pub e_degree1: [PolyT; 3],
}

pub fn base_vectors(k: u32, n: i64) -> BaseVectors {
    let k = k as i64;
    let lift = |p: PolyT| &p * &t_pow(n.abs());
    let mut degree0 = zero_vector();
    let sum = |lo: i64, hi: i64| (lo..=hi).fold(PolyT::zero(), |acc, e| &acc + &t_pow(e));
    let mut e_degree1 = [PolyT::zero(), PolyT::zero(), PolyT::zero()];
    if n <= 0 {
        degree0[ClassTag::SPlus.index()] = lift(sum(1, k));
        degree0[ClassTag::Ut3.index()] = lift(t_pow(k + 1));
        degree0[ClassTag::Ut5.index()] = lift(t_pow(k + 2));
        e_degree1[0] = lift(t_pow(k + 2));
        e_degree1[2] = lift(t_pow(k + 1));
    } else {
        degree0[ClassTag::SPlus.index()] = lift(sum(1, k - 1));
        degree0[ClassTag::SZero.index()] = lift(PolyT::one());
        degree0[ClassTag::U0.index()] = lift(t_pow(k));
        degree0[ClassTag::U2.index()] = lift(t_pow(k + 1));
    }
    BaseVectors { degree0, e_degree1 }
}

fn block(rows: [[PolyT; 3]; 3]) -> Vec<Vec<PolyT>> {
    rows.into_iter().map(|r| r.into_iter().collect()).collect()
}

fn scale_block(b: &[Vec<PolyT>], s: &PolyT) -> Vec<Vec<PolyT>> {
    b.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

fn add_block(a: &[Vec<PolyT>], b: &[Vec<PolyT>], sign: i64) -> Vec<Vec<PolyT>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| if sign > 0 { x + y } else { x - y }).collect())
        .collect()
}

/// t/(t-1) * m, which must be a polynomial matrix.
fn over_t_minus_one(m: &[Vec<PolyT>]) -> Result<Vec<Vec<PolyT>>> {
    let den = PolyT::from_i64(&[-1, 1]);
    let t = t_pow(1);
    m.iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    (&t * x).div_exact(&den).ok_or_else(|| Error::Assembly(format!("{x} is not divisible by t - 1")))
                })
                .collect()
        })
        .collect()
}

/// The 12 x 12 degree-recursion matrix with its modified top block row.
pub fn transfer_matrix(k: u32) -> Result<Matrix> {
    let k = k as i64;
    let t = |e: i64| t_pow(e);
    let z = PolyT::zero;
    let one = PolyT::one();
    let tt = t(1);
    let p_ee = scale_block(&block([[z(), t(k), z()], [t(k - 1), z(), t(k)], [z(), t(k - 1), z()]]), &tt);
    let p_us = scale_block(&block([[t(k), t(k), t(k - 1)], [z(), z(), z()], [t(k + 1), t(k + 1), t(k + 1)]]), &tt);
    let p_uu = scale_block(&block([[z(), t(k - 1), z()], [t(k), z(), t(k - 1)], [z(), t(k), z()]]), &tt);
    let p_tt = p_uu.clone();
    let m = |a: i64, b: i64| &t(a) - &t(b);
    let tm1 = m(1, 0);
    let a_core = block([
        [m(k, 1), m(k, 1), m(k - 1, 1)],
        [tm1.clone(), tm1.clone(), tm1.clone()],
        [m(k, 0), m(k, 0), m(k - 1, 0)],
    ]);
    let bc_core = block([
        [m(k, 1), m(k - 1, 1), m(k - 1, 1)],
        [tm1.clone(), tm1.clone(), tm1.clone()],
        [m(k, 0), m(k - 1, 0), m(k - 1, 0)],
    ]);
    let d_core = block([
        [m(k, 1), m(k, 1), m(k, 1)],
        [z(), tm1.clone(), tm1.clone()],
        [m(k - 1, 1), m(k - 1, 1), m(k, 1)],
    ]);
    let corner = block([[one.clone(), z(), z()], [z(), z(), z()], [z(), z(), one.clone()]]);
    let a = add_block(&over_t_minus_one(&a_core)?, &p_us, 1);
    let b = add_block(&over_t_minus_one(&bc_core)?, &mat_mul(&corner, &p_uu), 1);
    let c = add_block(&over_t_minus_one(&bc_core)?, &mat_mul(&corner, &p_tt), 1);
    let d = add_block(&over_t_minus_one(&d_core)?, &p_ee, -1);
    let zero = vec![vec![PolyT::zero(); 3]; 3];
    let rows: [[&Vec<Vec<PolyT>>; 4]; 4] =
        [[&a, &b, &c, &d], [&p_us, &p_uu, &zero, &zero], [&zero, &zero, &p_tt, &zero], [&zero, &zero, &zero, &p_ee]];
    let mut out: Vec<Vec<_>> = (0..12).map(|_| Vec::with_capacity(12)).collect();
    for (bi, brow) in rows.iter().enumerate() {
        for blk in brow.iter() {
            for r in 0..3 {
                out[3 * bi + r].extend(blk[r].iter().cloned());
            }
        }
    }
    Ok(out)
}

fn apply(m: &Matrix, v: &ClassVector) -> ClassVector {
    m.iter().map(|row| row.iter().zip(v).fold(PolyT::zero(), |acc, (a, b)| &acc + &(a * b))).collect()
}

/// Degree-d vector predicted by iterating the matrix from the base vectors.
pub fn matrix_counts_by_degree(k: u32, n: i64, d: usize) -> Result<ClassVector> {
    let p = transfer_matrix(k)?;
    let mut level = n - d as i64;
    let mut v = base_vectors(k, level).degree0;
    for step in 1..=d {
        level += 1;
        v = apply(&p, &v);
        if step == 1 {
            let e = base_vectors(k, level).e_degree1;
            for (i, x) in e.iter().enumerate() {
                v[9 + i] = &v[9 + i] + x;
            }
        }
    }
    Ok(v)
}

/// Exact class generating functions of one degree, plus the polynomials no row classifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    pub by_class: ClassVector,
    pub unclassified: PolyT,
}

type Key = (u32, ClassState, usize);

/// Counts of reduced words read from `regime`'s start, by final class and weight.
///
/// Each letter c weighs |c| + `extra`; words need at least `min_len` letters and at most
/// `max_len`. Weights above `order` are dropped. The leading letter is positive when
/// `positive_top`, otherwise either sign.
fn product_counts(
    k: u32,
    regime: Regime,
    min_len: usize,
    max_len: Option<usize>,
    extra: usize,
    order: usize,
    positive_top: bool,
) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let dfa = RuleAutomaton::new(k);
    let mut classes = vec![vec![BigInt::zero(); order + 1]; 12];
    let mut unclassified = vec![BigInt::zero(); order + 1];
    let mut layer: HashMap<Key, Vec<BigInt>> = HashMap::new();
    let mut first = vec![BigInt::zero(); order + 1];
    first[0] = BigInt::from(1);
    layer.insert((dfa.start(regime), ClassState::start(regime), 0), first);
    let letters: Vec<i64> = dfa.letters().collect();
    while !layer.is_empty() {
        let mut next: HashMap<Key, Vec<BigInt>> = HashMap::new();
        for ((q, cs, len), counts) in &layer {
            if *len >= min_len.max(1) && dfa.accepts(*q) {
                let target = match cs.output().and_then(|c| c.class) {
                    Some(tag) => &mut classes[tag.index()],
                    None => &mut unclassified,
                };
                for (w, c) in counts.iter().enumerate() {
                    target[w] += c;
                }
            }
            if max_len.is_some_and(|m| *len >= m) {
                continue;
            }
            for &c in &letters {
                if *len == 0 && (c == 0 || (positive_top && c < 0)) {
                    continue;
                }
                let q2 = dfa.step(*q, c);
                if dfa.is_dead(q2) {
                    continue;
                }
                let w = c.unsigned_abs() as usize + extra;
                if w > order {
                    continue;
                }
                if counts.iter().take(order + 1 - w).all(|x| x.is_zero()) {
                    continue;
                }
                let len2 = if max_len.is_some() { *len + 1 } else { (*len + 1).min(min_len.max(1)) };
                let slot = next.entry((q2, cs.step(c, k), len2)).or_insert_with(|| vec![BigInt::zero(); order + 1]);
                for (i, x) in counts.iter().enumerate().take(order + 1 - w) {
                    slot[i + w] += x;
                }
            }
        }
        layer = next;
    }
    (classes, unclassified)
}

fn to_poly(v: Vec<BigInt>, shift: i64) -> PolyT {
    let p = PolyT::from_coeffs(v);
    if shift >= 0 {
        p.shift(shift as usize)
    } else {
        let s = (-shift) as usize;
        PolyT::from_coeffs(p.coeffs().iter().skip(s).cloned().collect())
    }
}

/// Class generating functions of degree-d reduced polynomials with positive leading coefficient.
pub fn class_counts_by_degree(k: u32, n: i64, d: usize) -> ClassCounts {
    let m = d as i64;
    let base = (m - n).abs() + m;
    let order = base as usize + (d + 1) * (k as usize + 2);
    let (classes, unclassified) = product_counts(k, Regime::of(m, n), d + 1, Some(d + 1), 0, order, true);
    let mut by_class: ClassVector = classes.into_iter().map(|v| to_poly(v, base)).collect();
    if d == 0 && n > 0 {
        let i = ClassTag::SZero.index();
        by_class[i] = &by_class[i] + &t_pow(n);
    }
    ClassCounts { by_class, unclassified: to_poly(unclassified, base) }
}

/// Coefficients through t^order of the class generating functions summed over all degrees.
pub fn class_series_coeffs(k: u32, n: i64, order: usize) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut classes = vec![vec![BigInt::zero(); order + 1]; 12];
    let mut unclassified = vec![BigInt::zero(); order + 1];
    let mut add = |src: (Vec<Vec<BigInt>>, Vec<BigInt>), shift: i64| {
        for (dst, v) in classes.iter_mut().chain(std::iter::once(&mut unclassified)).zip(src.0.into_iter().chain(std::iter::once(src.1))) {
            for (w, c) in v.into_iter().enumerate() {
                let e = w as i64 + shift;
                if e >= 0 && (e as usize) <= order {
                    dst[e as usize] += c;
                }
            }
        }
    };
    // Degrees below n and equal to n have L = n + sum |c|.
    for m in 0..=n.max(-1) {
        if m < 0 {
            break;
        }
        let regime = Regime::of(m, n);
        let len = m as usize + 1;
        add(product_counts(k, regime, len, Some(len), 0, order.saturating_sub(n as usize), true), n);
    }
    // Degrees m > max(n, -1): L = 2m - n + sum |c| = sum (2 + |c|) - 2 - n.
    let min_len = (n + 2).max(1) as usize;
    let shift = -2 - n;
    let budget = (order as i64 - shift).max(0) as usize;
    add(product_counts(k, Regime::Gt, min_len, None, 2, budget, true), shift);
    if n > 0 && (n as usize) <= order {
        classes[ClassTag::SZero.index()][n as usize] += 1;
    }
    (classes, unclassified)
}

/// Rational class generating functions summed over degrees, recovered from their expansions.
pub fn summed_class_series(k: u32, n: i64) -> Result<Vec<RationalT>> {
    let mut order = 48;
    loop {
        let (classes, _) = class_series_coeffs(k, n, order);
        let fits: Result<Vec<RationalT>> = classes.iter().map(|c| fit_rational(c, 12)).collect();
        match fits {
            Ok(f) => return Ok(f),
            Err(e) if order >= 384 => return Err(e),
            Err(_) => order *= 2,
        }
    }
}

/// Seed + (I - P)^-1 seed with the degree-1 seed at level 0, solved over Z[t].
pub fn matrix_summed_series(k: u32) -> Result<Vec<RationalT>> {
    let p = transfer_matrix(k)?;
    let seed = matrix_counts_by_degree(k, 0, 1)?;
    let a: Matrix = (0..12)
        .map(|i| (0..12).map(|j| if i == j { &PolyT::one() - &p[i][j] } else { -&p[i][j] }).collect())
        .collect();
    let b: Matrix = seed.iter().map(|s| vec![s.clone()]).collect();
    let (det, x) = bareiss_solve(&a, &b)?;
    seed.iter().zip(&x).map(|(s, xi)| RationalT::new(&(s * &det) + &xi[0], det.clone())).collect()
}

/// sum_{d <= depth} P^d v, truncated to t^order.
pub fn partial_sums(p: &Matrix, v: &ClassVector, depth: usize, order: usize) -> ClassVector {
    let mut acc: ClassVector = v.iter().map(|x| x.truncate(order)).collect();
    let mut cur = acc.clone();
    for _ in 0..depth {
        cur = apply(p, &cur).into_iter().map(|x| x.truncate(order)).collect();
        acc = acc.iter().zip(&cur).map(|(a, b)| a + b).collect();
    }
    acc
}

/// (I - P)^-1 v expanded through t^order.
pub fn resolvent_expansion(p: &Matrix, v: &ClassVector, order: usize) -> Result<ClassVector> {
    let a: Matrix = (0..p.len())
        .map(|i| (0..p.len()).map(|j| if i == j { &PolyT::one() - &p[i][j] } else { -&p[i][j] }).collect())
        .collect();
    let b: Matrix = v.iter().map(|s| vec![s.clone()]).collect();
    let (det, x) = bareiss_solve(&a, &b)?;
    x.iter()
        .map(|xi| {
            let r = RationalT::new(xi[0].clone(), det.clone())?;
            Ok(PolyT::from_coeffs(r.expand(order)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::successor::enumerate_reduced;

    #[test]
    fn base_vector_examples() {
        let b = base_vectors(2, 0);
        assert_eq!(b.degree0[0], PolyT::from_i64(&[0, 1, 1]));
        assert_eq!(b.degree0[6], t_pow(3));
        assert_eq!(b.degree0[8], t_pow(4));
        assert_eq!(b.e_degree1[0], t_pow(4));
        assert_eq!(b.e_degree1[2], t_pow(3));
    }

    #[test]
    fn matrix_examples() {
        let p = transfer_matrix(2).unwrap();
        assert_eq!(p[9][10], t_pow(3));
        assert_eq!(p[3 + 2][2], t_pow(4));
        for i in 6..12 {
            for j in 0..6 {
                assert!(p[i][j].is_zero());
            }
        }
        for row in &p {
            for x in row {
                assert!(x.coeff(0).is_zero());
            }
        }
    }

    fn histogram(k: u32, n: i64, d: usize, max_len: u64) -> (ClassVector, PolyT) {
        let mut v = zero_vector();
        let mut un = PolyT::zero();
        for e in enumerate_reduced(k, n, max_len) {
            let deg = e.poly.max_degree().unwrap_or(0);
            if deg != d as i64 || (e.poly.is_zero() && n <= 0) {
                continue;
            }
            let term = t_pow(e.length as i64);
            match e.class.and_then(|c| c.class) {
                Some(tag) => v[tag.index()] = &v[tag.index()] + &term,
                None => un = &un + &term,
            }
        }
        (v, un)
    }

    #[test]
    fn degree_counts_match_enumeration() {
        for n in -2..=3 {
            for d in 0..=3usize {
                let exact = class_counts_by_degree(2, n, d);
                let max_len = 10u64;
                let (h, un) = histogram(2, n, d, max_len);
                for i in 0..12 {
                    assert_eq!(exact.by_class[i].truncate(max_len as usize), h[i], "n={n} d={d} class {i}");
                }
                assert_eq!(exact.unclassified.truncate(max_len as usize), un);
            }
        }
    }

    #[test]
    fn summed_series_matches_degree_sums() {
        let (classes, _) = class_series_coeffs(2, 1, 12);
        let mut sum = zero_vector();
        for d in 0..=12 {
            let c = class_counts_by_degree(2, 1, d);
            sum = sum.iter().zip(&c.by_class).map(|(a, b)| a + b).collect();
        }
        for i in 0..12 {
            assert_eq!(PolyT::from_coeffs(classes[i].clone()), sum[i].truncate(12));
        }
    }

    #[test]
    fn resolvent_truncation_identity() {
        let p = transfer_matrix(2).unwrap();
        let seed = matrix_counts_by_degree(2, 0, 1).unwrap();
        let lhs = resolvent_expansion(&p, &seed, 10).unwrap();
        let rhs = partial_sums(&p, &seed, 10, 10);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn n_shift_identity() {
        let order = 16;
        let (base, _) = class_series_coeffs(2, 0, order);
        for n in [-1i64, -2, -3] {
            let (shifted, _) = class_series_coeffs(2, n, order);
            for i in 0..12 {
                let want = PolyT::from_coeffs(base[i].clone()).shift((-n) as usize).truncate(order);
                assert_eq!(PolyT::from_coeffs(shifted[i].clone()), want, "n={n} class {i}");
            }
        }
    }

    #[test]
    fn summed_series_s_plus_matches_enumeration() {
        let series = summed_class_series(2, 0).unwrap();
        let coeffs = series[ClassTag::SPlus.index()].expand(12).unwrap();
        let mut want = vec![BigInt::zero(); 13];
        for e in enumerate_reduced(2, 0, 12) {
            if e.class.and_then(|c| c.class) == Some(ClassTag::SPlus) {
                want[e.length as usize] += 1;
            }
        }
        assert_eq!(coeffs, want);
    }
}
