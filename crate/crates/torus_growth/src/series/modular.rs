//! Arithmetic modulo word-sized primes, Chinese remaindering, and rational reconstruction of
//! integer sequences that satisfy a linear recurrence.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::{expand_coeffs, PolyT, RationalT};
use crate::error::{Error, Result};

pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + p as u128 - b as u128 % p as u128) % p as u128) as u64
}

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The `count` largest primes below 2^62.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = (1u64 << 62) - 1;
    while out.len() < count {
        if is_prime(n) {
            out.push(n);
        }
        n -= 2;
    }
    out
}

/// The unique x with 0 <= x < prod p_i and x = r_i (mod p_i).
pub fn crt(residues: &[u64], moduli: &[u64]) -> BigInt {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (&r, &p) in residues.iter().zip(moduli) {
        let pb = BigInt::from(p);
        let cur = (&x % &pb).to_u64_digits().1.first().copied().unwrap_or(0);
        let m_mod = (&m % &pb).to_u64_digits().1.first().copied().unwrap_or(0);
        let t = mul_mod(sub_mod(r, cur, p), inv_mod(m_mod, p), p);
        x += &m * BigInt::from(t);
        m *= pb;
    }
    x
}

/// Symmetric representative of `x` modulo `m`.
pub fn symmetric(x: BigInt, m: &BigInt) -> BigInt {
    let x = x.mod_floor(m);
    if &x * 2 > *m {
        x - m
    } else {
        x
    }
}

/// Shortest connection polynomial C (C(0) = 1) of `seq` over Z/p, with its length L.
pub fn berlekamp_massey_mod(seq: &[u64], p: u64) -> (Vec<u64>, usize) {
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let (mut l, mut m, mut bd) = (0usize, 1usize, 1u64);
    for n in 0..seq.len() {
        let mut d = seq[n] % p;
        for i in 1..=l.min(c.len() - 1) {
            d = add_mod(d, mul_mod(c[i], seq[n - i], p), p);
        }
        if d == 0 {
            m += 1;
            continue;
        }
        let coef = mul_mod(d, inv_mod(bd, p), p);
        let old = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + m] = sub_mod(c[i + m], mul_mod(coef, bi, p), p);
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = old;
            bd = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    c.resize(l + 1, 0);
    (c, l)
}

/// Recovers N/D with D(0) = 1 from exact coefficients and their residues modulo `moduli`.
///
/// The denominator is reconstructed coefficientwise by Chinese remaindering the per-prime
/// connection polynomials; the result must reproduce every given coefficient.
pub fn fit_rational_multimodular(exact: &[BigInt], residues: &[Vec<u64>], moduli: &[u64], margin: usize) -> Result<RationalT> {
    let mut conn = Vec::new();
    let mut order = None;
    for (res, &p) in residues.iter().zip(moduli) {
        let (c, l) = berlekamp_massey_mod(res, p);
        if *order.get_or_insert(l) != l {
            return Err(Error::Assembly(format!("recurrence order differs across primes ({l})")));
        }
        conn.push(c);
    }
    let l = order.unwrap_or(0);
    if 2 * l + margin > exact.len() {
        return Err(Error::Assembly(format!(
            "recurrence of order {l} is not determined by {} terms",
            exact.len()
        )));
    }
    let m: BigInt = moduli.iter().map(|&p| BigInt::from(p)).product();
    let den: Vec<BigInt> = (0..=l)
        .map(|i| {
            let r: Vec<u64> = conn.iter().map(|c| c[i]).collect();
            symmetric(crt(&r, moduli), &m)
        })
        .collect();
    let den = PolyT::from_coeffs(den);
    let s = PolyT::from_coeffs(exact.to_vec());
    let num = if l == 0 { PolyT::zero() } else { (&den * &s).truncate(l - 1) };
    let r = RationalT::new(num, den)?;
    let back = expand_coeffs(&r, exact.len() - 1)?;
    if back != exact {
        return Err(Error::Assembly("reconstructed rational function does not reproduce the sequence".into()));
    }
    if r.denominator.coeff(0).abs() != BigInt::one() {
        return Err(Error::Assembly("denominator constant term is not a unit".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_are_prime() {
        let ps = primes(3);
        assert_eq!(ps[0], (1u64 << 62) - 57);
        assert!(ps.iter().all(|&p| is_prime(p)));
        assert!(!is_prime((1u64 << 62) - 1));
    }

    #[test]
    fn crt_roundtrip() {
        let ps = primes(3);
        let x: BigInt = BigInt::from(12345678901234567u64) * BigInt::from(98765432109876543u64);
        let r: Vec<u64> = ps.iter().map(|&p| (&x % BigInt::from(p)).try_into().unwrap()).collect();
        assert_eq!(crt(&r, &ps), x);
    }

    #[test]
    fn fibonacci_recurrence() {
        let mut f = vec![BigInt::one(), BigInt::one()];
        for i in 2..30 {
            let next = &f[i - 1] + &f[i - 2];
            f.push(next);
        }
        let ps = primes(2);
        let res: Vec<Vec<u64>> =
            ps.iter().map(|&p| f.iter().map(|x| (x % BigInt::from(p)).try_into().unwrap()).collect()).collect();
        let r = fit_rational_multimodular(&f, &res, &ps, 8).unwrap();
        // 1 / (1 - t - t^2), stored with a positive leading denominator coefficient.
        assert_eq!(r.denominator, PolyT::from_i64(&[-1, 1, 1]));
        assert_eq!(r.numerator, PolyT::from_i64(&[-1]));
    }
}
