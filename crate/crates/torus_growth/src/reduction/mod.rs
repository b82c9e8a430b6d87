//! Potential, Rules 1-6, poison subwords, rewriting and reduction.
//!
//! Potential inequalities with half-integer terms are compared in doubled
//! integers. Coefficients outside the scanned word count as 0.

pub mod automaton;

use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_core::{BallTable, GroupElement, GroupParams};
use crate::laurent::{balanced_representative, evaluate_rep, long_relation, n_length, relation_shift, CoeffWord, LaurentPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

impl RuleId {
    pub fn is_local(self) -> bool {
        matches!(self, RuleId::R1 | RuleId::R2 | RuleId::R3)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// A violated rule with the degree span [low, high] of its subword.
///
/// `sign` is the sign of the rewrite: the relation -sign * long_relation(low-1, high-low)
/// is added by `apply_rewrite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RuleViolation {
    pub rule: RuleId,
    pub low: i64,
    pub high: i64,
    pub sign: i64,
}

impl fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}, {}]", self.rule, self.low, self.high)
    }
}

/// sign(x) in {-1, 0, 1}.
pub fn sgn(x: i64) -> i64 {
    x.signum()
}

/// sign+(x): 1 for x >= 0, else -1.
pub fn sign_plus(x: i64) -> i64 {
    if x >= 0 {
        1
    } else {
        -1
    }
}

/// sign-(x): 1 for x > 0, else -1.
pub fn sign_minus(x: i64) -> i64 {
    if x > 0 {
        1
    } else {
        -1
    }
}

/// (2k - 1) - 2|c|.
pub fn pot1(c: i64, k: i64) -> i64 {
    (2 * k - 1) - 2 * c.abs()
}

pub fn potential(word: &CoeffWord, k: u32) -> i64 {
    word.coeffs.iter().map(|&c| pot1(c, k as i64)).sum()
}

/// All violations of the word formed by degrees `lo..=top` of `f`, at level n.
pub(crate) fn violations_of(f: &LaurentPoly, lo: i64, n: i64, k: u32) -> Vec<RuleViolation> {
    let m = match f.max_degree() {
        Some(m) if m >= lo => m,
        _ => return Vec::new(),
    };
    let c = |d: i64| if d < lo || d > m { 0 } else { f.coeff(d) };
    scan(&c, lo, m, n, k as i64)
}

fn scan(c: &dyn Fn(i64) -> i64, lo: i64, m: i64, n: i64, k: i64) -> Vec<RuleViolation> {
    let mut out = Vec::new();
    let top = c(m);
    let s = sgn(top);
    let local = |rule, d: i64| RuleViolation { rule, low: d, high: d, sign: sgn(c(d)) };

    if m >= n && (top.abs() > k + 2 || (top.abs() > k + 1 && sgn(top * c(m - 1)) < 0)) {
        out.push(local(RuleId::R1, m));
    }

    for i in lo..=m {
        if i == m && m >= n {
            continue;
        }
        let ci = c(i);
        if ci == 0 {
            continue;
        }
        let above = sgn(c(i + 1) * ci) < 0;
        let below = sgn(ci * c(i - 1)) < 0;
        let bound = match (above, below) {
            (true, true) => k - 1,
            (true, false) | (false, true) => k,
            (false, false) => k + 1,
        };
        if ci.abs() > bound {
            out.push(local(RuleId::R2, i));
        }
    }

    if m > n && top.abs() == 1 && m > lo {
        let c1 = c(m - 1) * s;
        if c1 == -k || (c1 == -k + 1 && sgn(c(m - 1) * c(m - 2)) < 0) {
            out.push(local(RuleId::R3, m - 1));
        }
    }

    // Rule 4: leading +-1, run starting in {-k+1,-k+2}, continuing in {-k+1,-k}, ending in {-k,-k-1}.
    if m > n && top.abs() == 1 && m > lo {
        let first = c(m - 1) * s;
        if first == -k + 1 || first == -k + 2 {
            let mut pot = pot1(first, k);
            let mut i = m - 2;
            while i >= lo {
                let ci = c(i) * s;
                if ci == -k || ci == -k - 1 {
                    let total = pot + pot1(ci, k);
                    if 2 * total < 2 + sign_minus(top * c(i - 1)) {
                        out.push(RuleViolation { rule: RuleId::R4, low: i, high: m - 1, sign: -s });
                    }
                }
                if ci == -k + 1 || ci == -k {
                    pot += pot1(ci, k);
                    i -= 1;
                } else {
                    break;
                }
            }
        }
    }

    // Rule 5: leading +-(k+1 or k+2), run in {k-1,k}, ending in {k,k+1}.
    if m >= n && (top.abs() == k + 1 || top.abs() == k + 2) {
        let mut pot = pot1(top, k);
        let mut i = m - 1;
        while i >= lo {
            let ci = c(i) * s;
            if ci == k || ci == k + 1 {
                let total = pot + pot1(ci, k);
                if 2 * total < -10 - sign_plus(top * c(i - 1)) {
                    out.push(RuleViolation { rule: RuleId::R5, low: i, high: m, sign: s });
                }
            }
            if ci == k - 1 || ci == k {
                pot += pot1(ci, k);
                i -= 1;
            } else {
                break;
            }
        }
    }

    // Rule 6: run (c_j, ..., c_l) with c_j in {k,k+1}, interior in {k-1,k}, c_l in {k,k+1}.
    for j in (lo + 1)..=m {
        if !(j < m || m < n) {
            continue;
        }
        let cj = c(j);
        if cj.abs() != k && cj.abs() != k + 1 {
            continue;
        }
        let sj = sgn(cj);
        let s1 = sign_plus(cj * c(j + 1));
        let mut pot = pot1(cj, k);
        let mut l = j - 1;
        while l >= lo {
            let cl = c(l) * sj;
            if cl == k || cl == k + 1 {
                let total = pot + pot1(cl, k);
                if 2 * total < -4 - 2 * s1 - sign_plus(cj * c(l - 1)) {
                    out.push(RuleViolation { rule: RuleId::R6, low: l, high: j, sign: sj });
                }
            }
            if cl == k - 1 || cl == k {
                pot += pot1(cl, k);
                l -= 1;
            } else {
                break;
            }
        }
    }
    out
}

/// Every violation of a polynomial-part word at level n.
pub fn violations(word: &CoeffWord, n: i64, k: u32) -> Result<Vec<RuleViolation>> {
    if word.coeffs.is_empty() {
        return Err(Error::EmptyWord);
    }
    let lo = word.low_degree();
    let f = LaurentPoly::from_ascending(lo, &word.coeffs.iter().rev().copied().collect::<Vec<_>>());
    Ok(violations_of(&f, lo, n, k))
}

/// Whether the polynomial (c_0, ..., c_m) is n-reduced. The zero polynomial is.
pub fn is_reduced(coeffs: &[i64], n: i64, k: u32) -> bool {
    is_reduced_poly(&LaurentPoly::from_poly(coeffs), n, k)
}

/// Whether the polynomial part of `f` is n-reduced.
pub fn is_reduced_poly(f: &LaurentPoly, n: i64, k: u32) -> bool {
    violations_of(f, 0, n, k).is_empty()
}

/// Minimal spans under inclusion, then smallest leading degree; equal spans go to the lower rule.
pub fn select_poison(viol: &[RuleViolation]) -> Option<RuleViolation> {
    viol.iter()
        .filter(|v| {
            !viol.iter().any(|w| {
                (w.low, w.high) != (v.low, v.high) && w.low >= v.low && w.high <= v.high
            })
        })
        .min_by_key(|v| (v.high, v.low, v.rule))
        .copied()
}

pub fn rightmost_minimal_poison(word: &CoeffWord, n: i64, k: u32) -> Result<Option<RuleViolation>> {
    Ok(select_poison(&violations(word, n, k)?))
}


/// -sign * long_relation(low - 1, high - low): the relation added by the rewrite of `v`.
pub fn rewrite_relation(params: &GroupParams, v: &RuleViolation) -> LaurentPoly {
    long_relation(params, v.low - 1, (v.high - v.low) as u32).scale(-v.sign)
}

/// Rewrite `v` after checking it is a current violation of the polynomial part of `f`.
pub fn apply_rewrite(params: &GroupParams, f: &LaurentPoly, v: &RuleViolation, n: i64) -> Result<LaurentPoly> {
    if !violations_of(f, 0, n, params.k()).contains(v) {
        return Err(Error::NotViolating(format!("{v} in {f} at n = {n}")));
    }
    Ok(f.add_scaled(&rewrite_relation(params, v), 1))
}

/// Which side of a Laurent polynomial a rewrite acted on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Part {
    Polynomial,
    /// The principal part, rewritten through its mirror at level -n.
    Principal,
}

/// One rewrite: the rule, its span, and the polynomial with its n-length before and after.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub part: Part,
    pub violation: RuleViolation,
    pub before: LaurentPoly,
    pub after: LaurentPoly,
    pub len_before: u64,
    pub len_after: u64,
}

impl TraceStep {
    /// Change of the coefficient just below the rewritten span, in the frame of `part`.
    pub fn carry(&self) -> i64 {
        let (before, after, low) = match self.part {
            Part::Polynomial => (self.before.clone(), self.after.clone(), self.violation.low),
            Part::Principal => (self.before.mirror(), self.after.mirror(), self.violation.low),
        };
        after.coeff(low - 1) - before.coeff(low - 1)
    }
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = match self.part {
            Part::Polynomial => "",
            Part::Principal => " (principal)",
        };
        write!(
            f,
            "{}{} {} -> {} L {} -> {}",
            self.violation, part, self.before, self.after, self.len_before, self.len_after
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub result: LaurentPoly,
    pub trace: Vec<TraceStep>,
    /// Consecutive poison pairs that failed to move strictly left (only counted when not enforced).
    pub progress_failures: usize,
}

/// What to do when a poison subword fails to move strictly left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProgressCheck {
    Enforce,
    Record,
}

fn guard(f: &LaurentPoly) -> usize {
    4 * f.support_size().max(1)
}

/// Rightmost-poison reduction of the degrees >= r of `f` at level n.
///
/// Coefficients are taken in from the top one degree at a time: the window of degrees >= j is
/// reduced before c_(j-1) joins it, so every poison subword found in a window touches its lowest
/// degree. Degree r - 1 absorbs the carry of the last rewrite; lower degrees are untouched.
pub fn reduce_polynomial_part(params: &GroupParams, f: &LaurentPoly, n: i64, r: i64) -> Result<Reduction> {
    reduce_polynomial_part_with(params, f, n, r, ProgressCheck::Enforce)
}

pub fn reduce_polynomial_part_with(
    params: &GroupParams,
    f: &LaurentPoly,
    n: i64,
    r: i64,
    check: ProgressCheck,
) -> Result<Reduction> {
    let limit = guard(f);
    let mut cur = f.clone();
    let mut trace: Vec<TraceStep> = Vec::new();
    let mut failures = 0;
    let top = match cur.max_degree() {
        Some(m) if m >= r => m,
        _ => return Ok(Reduction { result: cur, trace, progress_failures: 0 }),
    };
    for lo in (r..=top).rev() {
        let mut prev: Option<RuleViolation> = None;
        while let Some(v) = select_poison(&violations_of(&cur, lo, n, params.k())) {
            if let Some(p) = prev {
                if !(v.high > p.high && v.low > p.low) {
                    match check {
                        ProgressCheck::Enforce => {
                            return Err(Error::Progress(format!("{p} then {v} while reducing {f} at n = {n}")))
                        }
                        ProgressCheck::Record => failures += 1,
                    }
                }
            }
            if trace.len() >= limit {
                return Err(Error::NonTermination(limit));
            }
            let next = cur.add_scaled(&rewrite_relation(params, &v), 1);
            trace.push(TraceStep {
                part: Part::Polynomial,
                violation: v,
                len_before: n_length(&cur, n).0,
                len_after: n_length(&next, n).0,
                before: cur,
                after: next.clone(),
            });
            cur = next;
            prev = Some(v);
        }
    }
    Ok(Reduction { result: cur, trace, progress_failures: failures })
}

/// Whether the principal part Q of `f` has an (-n)-reduced mirror X^-1 Q(X^-1).
pub fn principal_part_reduced(f: &LaurentPoly, n: i64, k: u32) -> bool {
    is_reduced_poly(&f.principal_part().mirror(), -n, k)
}

/// Alternately reduce the mirrored principal part at level -n and the polynomial part at level n
/// until both are reduced.
pub fn reduce_full(params: &GroupParams, f: &LaurentPoly, n: i64) -> Result<Reduction> {
    reduce_full_with(params, f, n, ProgressCheck::Enforce)
}

pub fn reduce_full_with(params: &GroupParams, f: &LaurentPoly, n: i64, check: ProgressCheck) -> Result<Reduction> {
    let limit = guard(f);
    let k = params.k();
    let mut cur = f.clone();
    let mut trace = Vec::new();
    let mut failures = 0;
    while !(is_reduced_poly(&cur, n, k) && principal_part_reduced(&cur, n, k)) {
        let mirrored = reduce_polynomial_part_with(params, &cur.mirror(), -n, 0, check)?;
        failures += mirrored.progress_failures;
        trace.extend(mirrored.trace.into_iter().map(|s| TraceStep {
            part: Part::Principal,
            before: s.before.mirror(),
            after: s.after.mirror(),
            ..s
        }));
        cur = mirrored.result.mirror();
        let direct = reduce_polynomial_part_with(params, &cur, n, 0, check)?;
        failures += direct.progress_failures;
        trace.extend(direct.trace);
        cur = direct.result;
        if trace.len() > limit {
            return Err(Error::NonTermination(limit));
        }
    }
    Ok(Reduction { result: cur, trace, progress_failures: failures })
}

/// Outcome of the brute-force representative search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub poly: LaurentPoly,
    pub length: u64,
    /// `None` when the search budget ran out.
    pub stabilized: Option<()>,
    /// Agreement with the BFS distance, when the ball covers the element.
    pub verified: Option<bool>,
}

/// Best-first search over F + c X^d (X^2 - (2k+1) X + 1) starting from the balanced representative,
/// minimizing the n-length. Stops after `budget` expansions or when the queue only
/// holds representatives longer than `slack` above the best one found.
pub fn minimal_representative_search(
    params: &GroupParams,
    x: &[BigInt; 2],
    n: i64,
    budget: usize,
    ball: Option<&BallTable>,
) -> Result<SearchResult> {
    use std::cmp::Reverse;
    use std::collections::{BinaryHeap, HashSet};

    let slack = 4;
    let seed = balanced_representative(params, x)?;
    let bound = 2 * params.k() as i64 + 3;
    let mut best = (n_length(&seed, n).0, seed.clone());
    let mut seen: HashSet<LaurentPoly> = HashSet::new();
    let mut heap = BinaryHeap::new();
    seen.insert(seed.clone());
    heap.push(Reverse((best.0, seed)));
    let mut expansions = 0;
    let mut stabilized = None;
    while let Some(Reverse((len, f))) = heap.pop() {
        if len > best.0 + slack {
            stabilized = Some(());
            break;
        }
        if expansions >= budget {
            break;
        }
        expansions += 1;
        let (_, b) = n_length(&f, n);
        let lo = f.min_degree().unwrap_or(0).min(-(b.p as i64) - 1) - 2;
        let hi = f.max_degree().unwrap_or(0).max(b.q as i64);
        for d in lo..=hi {
            for s in [-1, 1] {
                let g = f.add_scaled(&relation_shift(params, d), s);
                if g.terms().any(|(_, c)| c.abs() > bound) || seen.contains(&g) {
                    continue;
                }
                let l = n_length(&g, n).0;
                if l < best.0 {
                    best = (l, g.clone());
                }
                seen.insert(g.clone());
                heap.push(Reverse((l, g)));
            }
        }
    }
    if heap.is_empty() {
        stabilized = Some(());
    }
    let verified = ball.and_then(|b| {
        let g = GroupElement { x: x.clone(), n: BigInt::from(n) };
        b.distance(&g).map(|d| d as u64 == best.0)
    });
    if verified == Some(false) && stabilized.is_some() {
        return Err(Error::Certification {
            radius: best.0 as usize,
            series: format!("search length {} for {:?} at n = {}", best.0, x, n),
            bfs: "shorter".into(),
        });
    }
    Ok(SearchResult { poly: best.1, length: best.0, stabilized, verified })
}

/// The group element represented by (F, t^n).
pub fn element_of(params: &GroupParams, f: &LaurentPoly, n: i64) -> GroupElement {
    let x = evaluate_rep(params, f);
    GroupElement { x, n: BigInt::from(n) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_core::bfs_ball;

    fn p2() -> GroupParams {
        GroupParams::new(2).unwrap()
    }

    fn word(asc: &[i64]) -> CoeffWord {
        CoeffWord::from_ascending(asc)
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential(&CoeffWord::new(0, vec![2]), 2), -1);
        assert_eq!(potential(&CoeffWord::new(0, vec![0]), 2), 3);
        assert_eq!(potential(&CoeffWord::new(2, vec![3, 2, 2]), 2), -5);
    }

    #[test]
    fn violation_examples() {
        let v = violations(&word(&[4]), 1, 2).unwrap();
        assert_eq!(v, vec![RuleViolation { rule: RuleId::R2, low: 0, high: 0, sign: 1 }]);
        assert!(violations(&word(&[0, 3]), 0, 2).unwrap().is_empty());
        // c_{m-1} = -k breaks Rule 3 before any Rule 4 run can start.
        let v = violations(&word(&[-3, -2, -2, 1]), 0, 2).unwrap();
        assert!(v.iter().any(|v| v.rule == RuleId::R3));
        assert!(v.iter().all(|v| v.rule != RuleId::R4));
        let v = violations(&word(&[1, -2, -1, 1]), 0, 2).unwrap();
        assert!(v.iter().any(|v| v.rule == RuleId::R4));
        assert!(violations(&CoeffWord::new(0, vec![]), 0, 2).is_err());
    }

    #[test]
    fn poison_examples() {
        assert_eq!(rightmost_minimal_poison(&word(&[1, 2]), 0, 2).unwrap(), None);
        let v = rightmost_minimal_poison(&word(&[4]), 1, 2).unwrap().unwrap();
        assert_eq!((v.rule, v.low, v.high), (RuleId::R2, 0, 0));
        let viol = [
            RuleViolation { rule: RuleId::R6, low: 5, high: 7, sign: 1 },
            RuleViolation { rule: RuleId::R6, low: 1, high: 3, sign: 1 },
            RuleViolation { rule: RuleId::R6, low: 1, high: 7, sign: 1 },
        ];
        assert_eq!(select_poison(&viol).unwrap().high, 3);
    }

    #[test]
    fn rewrite_examples() {
        let p = p2();
        // k + 2 is reduced at n <= 0; at n = 1 it violates Rule 2.
        let f = LaurentPoly::constant(4);
        assert!(violations_of(&f, 0, 0, 2).is_empty());
        let v = violations_of(&f, 0, 1, 2)[0];
        let g = apply_rewrite(&p, &f, &v, 1).unwrap();
        assert_eq!(g, LaurentPoly::from_ascending(-1, &[1, -1, 1]));
        assert_eq!(evaluate_rep(&p, &f), evaluate_rep(&p, &g));
        assert!(apply_rewrite(&p, &g, &v, 1).is_err());

        for k in 2..6u32 {
            let pk = GroupParams::new(k).unwrap();
            let k = k as i64;
            let f = LaurentPoly::from_poly(&[2, k, k, k, k - 1, k + 1, 1]);
            let want = LaurentPoly::from_poly(&[3, -k, -k + 1, -k + 1, -k, -k + 1, 2]);
            let all = violations_of(&f, 0, 0, pk.k());
            let v = RuleViolation { rule: RuleId::R6, low: 1, high: 5, sign: 1 };
            assert!(all.contains(&v), "k={k} {all:?}");
            assert_eq!(apply_rewrite(&pk, &f, &v, 0).unwrap(), want);
            assert!(n_length(&want, 0).0 < n_length(&f, 0).0);
        }
    }

    #[test]
    fn rule4_rewrite_uses_leading_sign() {
        // k = 2: the run may start with c_{m-1} = -k+2 = 0.
        let p = p2();
        let f = LaurentPoly::from_poly(&[1, -2, -2, 0, 1]);
        let r = reduce_polynomial_part(&p, &f, 2, 0).unwrap();
        assert!(is_reduced_poly(&r.result, 2, 2));
        assert_eq!(evaluate_rep(&p, &r.result), evaluate_rep(&p, &f));
    }

    #[test]
    fn reduce_examples() {
        let p = p2();
        let one = LaurentPoly::constant(1);
        assert_eq!(reduce_polynomial_part(&p, &one, 0, 0).unwrap().result, one);
        let r = reduce_polynomial_part(&p, &LaurentPoly::constant(4), 1, 0).unwrap();
        assert_eq!(r.result, LaurentPoly::from_ascending(-1, &[1, -1, 1]));
        assert_eq!(r.trace.len(), 1);
        let r = reduce_full(&p, &LaurentPoly::constant(4), 1).unwrap();
        assert_eq!(r.result, LaurentPoly::from_ascending(-1, &[1, -1, 1]));
        assert!(principal_part_reduced(&r.result, 1, 2));
        assert_eq!(reduce_full(&p, &LaurentPoly::constant(4), 0).unwrap().result, LaurentPoly::constant(4));
        assert_eq!(reduce_full(&p, &one, 3).unwrap().result, one);
    }

    #[test]
    fn trace_format() {
        let p = p2();
        let r = reduce_full(&p, &LaurentPoly::constant(4), 1).unwrap();
        assert_eq!(r.trace[0].to_string(), "R2 [0, 0] lo=0;4 -> lo=-1;1,-1,1 L 5 -> 4");
    }

    #[test]
    fn search_examples() {
        let p = p2();
        let ball = bfs_ball(&p, 4).unwrap();
        let b = |a: i64, c: i64| [BigInt::from(a), BigInt::from(c)];
        let r = minimal_representative_search(&p, &b(0, 1), 0, 1000, Some(&ball)).unwrap();
        assert_eq!((r.poly.clone(), r.length, r.verified), (LaurentPoly::constant(1), 1, Some(true)));
        let r = minimal_representative_search(&p, &b(-1, 5), 1, 1000, Some(&ball)).unwrap();
        assert_eq!((r.poly.clone(), r.length), (LaurentPoly::monomial(1, 1), 2));
        let r = minimal_representative_search(&p, &b(1, 0), 0, 1000, Some(&ball)).unwrap();
        assert_eq!((r.poly.clone(), r.length, r.verified), (LaurentPoly::monomial(-1, 1), 1, Some(true)));
    }
}
