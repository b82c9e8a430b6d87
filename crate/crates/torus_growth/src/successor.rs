//! n-types and n-classes of reduced polynomials, and the successor map that
//! walks through every n-reduced polynomial with non-negative leading coefficient.
//!
//! The class of X R + c depends only on the (n-1)-classes of R and -R and on c,
//! so classification is a finite transducer read from the leading coefficient
//! down. Which base cases apply depends on n only through the sign of m - n.

use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_core::GroupParams;
use crate::laurent::{evaluate_rep, n_length, LaurentPoly};
use crate::reduction::automaton::{Regime, RuleAutomaton};
use crate::reduction::{is_reduced_poly, reduce_polynomial_part, select_poison, violations_of, RuleId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClassTag {
    #[serde(rename = "S+")]
    SPlus,
    #[serde(rename = "S0")]
    SZero,
    #[serde(rename = "S-")]
    SMinus,
    #[serde(rename = "U0")]
    U0,
    #[serde(rename = "U-1")]
    U1,
    #[serde(rename = "U-2")]
    U2,
    #[serde(rename = "Ut-3")]
    Ut3,
    #[serde(rename = "Ut-4")]
    Ut4,
    #[serde(rename = "Ut-5")]
    Ut5,
    E1,
    E2,
    E3,
}

impl ClassTag {
    pub const ALL: [ClassTag; 12] = [
        ClassTag::SPlus,
        ClassTag::SZero,
        ClassTag::SMinus,
        ClassTag::U0,
        ClassTag::U1,
        ClassTag::U2,
        ClassTag::Ut3,
        ClassTag::Ut4,
        ClassTag::Ut5,
        ClassTag::E1,
        ClassTag::E2,
        ClassTag::E3,
    ];

    /// Position in [`ClassTag::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            ClassTag::SPlus => "S+",
            ClassTag::SZero => "S0",
            ClassTag::SMinus => "S-",
            ClassTag::U0 => "U0",
            ClassTag::U1 => "U-1",
            ClassTag::U2 => "U-2",
            ClassTag::Ut3 => "Ut-3",
            ClassTag::Ut4 => "Ut-4",
            ClassTag::Ut5 => "Ut-5",
            ClassTag::E1 => "E1",
            ClassTag::E2 => "E2",
            ClassTag::E3 => "E3",
        }
    }

    pub fn is_e(self) -> bool {
        matches!(self, ClassTag::E1 | ClassTag::E2 | ClassTag::E3)
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A class, possibly of the negated polynomial (the classes -E2, -U-2, ... of signed mode).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NClass {
    pub tag: ClassTag,
    pub negated: bool,
}

impl fmt::Display for NClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.tag)
        } else {
            write!(f, "{}", self.tag)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum NType {
    Initial,
    Interior,
    Negative,
    BoundaryP,
    BoundaryS,
}

impl NType {
    /// Types whose successor is P + 1.
    pub fn is_regular(self) -> bool {
        matches!(self, NType::Initial | NType::Interior | NType::Negative)
    }

    pub fn label(self) -> &'static str {
        match self {
            NType::Initial => "initial",
            NType::Interior => "interior",
            NType::Negative => "negative",
            NType::BoundaryP => "boundaryP",
            NType::BoundaryS => "boundaryS",
        }
    }
}

impl fmt::Display for NType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Type and class; only the initial type (P = 0, n <= 0) has no class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Classified {
    #[serde(rename = "type")]
    pub ty: NType,
    pub class: Option<ClassTag>,
}

impl Classified {
    fn new(ty: NType, class: ClassTag) -> Self {
        Classified { ty, class: Some(class) }
    }
}

impl fmt::Display for Classified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            Some(c) => write!(f, "{} {}", self.ty, c),
            None => write!(f, "{}", self.ty),
        }
    }
}

/// Base case for a nonzero constant at a level that is positive or not.
fn base_constant(c: i64, level_positive: bool, k: i64) -> Option<Classified> {
    use ClassTag::*;
    use NType::*;
    if c > 0 {
        match (level_positive, c) {
            (false, c) if c <= k => Some(Classified::new(Interior, SPlus)),
            (false, c) if c == k + 1 => Some(Classified::new(Interior, Ut3)),
            (false, c) if c == k + 2 => Some(Classified::new(BoundaryP, Ut5)),
            (true, c) if c < k => Some(Classified::new(Interior, SPlus)),
            (true, c) if c == k => Some(Classified::new(Interior, U0)),
            (true, c) if c == k + 1 => Some(Classified::new(BoundaryP, U2)),
            _ => None,
        }
    } else {
        let bound = if level_positive { k + 1 } else { k + 2 };
        (c < 0 && -c <= bound).then(|| Classified::new(Negative, SMinus))
    }
}

/// Class of X R + c from the classes of R and -R one level down.
fn induct(r: Option<Classified>, c: i64, neg_r: Option<Classified>, k: i64) -> Option<Classified> {
    use ClassTag::*;
    use NType::*;
    let a = r?.class?;
    if 0 < c && c <= k - 2 {
        return Some(Classified::new(Interior, SPlus));
    }
    if c == 0 {
        if a == E1 {
            return Some(Classified::new(BoundaryS, SZero));
        }
        if neg_r.and_then(|x| x.class) == Some(U2) {
            return (a == SMinus).then(|| Classified::new(BoundaryS, SZero));
        }
        return Some(Classified::new(Interior, SZero));
    }
    if c == k - 1 {
        return Some(match a {
            SZero | SPlus | U0 | Ut3 => Classified::new(Interior, SPlus),
            U1 | SMinus | E1 | E2 | E3 => Classified::new(Interior, U0),
            Ut4 => Classified::new(Interior, Ut3),
            U2 => Classified::new(BoundaryP, U1),
            Ut5 => Classified::new(BoundaryP, Ut4),
        });
    }
    if c == k {
        return match a {
            SZero | SPlus => Some(Classified::new(Interior, U0)),
            U1 | SMinus | E1 | E2 | E3 => Some(Classified::new(BoundaryP, U2)),
            Ut4 => Some(Classified::new(BoundaryP, Ut5)),
            U0 => Some(Classified::new(BoundaryP, U1)),
            Ut3 => Some(Classified::new(BoundaryP, Ut4)),
            U2 | Ut5 => None,
        };
    }
    if c == k + 1 {
        return matches!(a, SPlus | SZero).then(|| Classified::new(BoundaryP, U2));
    }
    if c < 0 {
        let tag = match (a, c) {
            (E1, c) if c == -k + 1 => E2,
            (E2, c) if c == -k + 1 => E3,
            (E3, c) if c == -k + 1 => SMinus,
            (E2, c) if c == -k => E1,
            (E3, c) if c == -k => E2,
            _ => SMinus,
        };
        return Some(Classified::new(Negative, tag));
    }
    None
}

/// State of the classification transducer after reading the top digits R of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassState {
    Start(Regime),
    /// Classes of R and -R; `None` is unclassified. `leading_one` marks R = 1 with the
    /// two-digit base case still available.
    Run { pos: Option<Classified>, neg: Option<Classified>, leading_one: bool },
}

impl ClassState {
    pub fn start(regime: Regime) -> Self {
        ClassState::Start(regime)
    }

    /// Read the next lower coefficient. The first letter must be nonzero.
    pub fn step(self, c: i64, k: u32) -> Self {
        let k = k as i64;
        match self {
            ClassState::Start(regime) => {
                let positive = regime == Regime::Lt;
                ClassState::Run {
                    pos: base_constant(c, positive, k),
                    neg: base_constant(-c, positive, k),
                    leading_one: regime == Regime::Gt && c == 1,
                }
            }
            ClassState::Run { pos, neg, leading_one } => {
                let next_pos = if leading_one && c == -k + 1 {
                    Some(Classified::new(NType::Negative, ClassTag::E1))
                } else if leading_one && c == -k + 2 {
                    Some(Classified::new(NType::Negative, ClassTag::E3))
                } else {
                    induct(pos, c, neg, k)
                };
                ClassState::Run { pos: next_pos, neg: induct(neg, -c, pos, k), leading_one: false }
            }
        }
    }

    /// Classification of the word read so far, if it has one.
    pub fn output(self) -> Option<Classified> {
        match self {
            ClassState::Start(_) => None,
            ClassState::Run { pos, .. } => pos,
        }
    }
}

fn polynomial_digits(p: &LaurentPoly) -> Result<Vec<i64>> {
    if p.min_degree().is_some_and(|d| d < 0) {
        return Err(Error::Successor(format!("{p} has negative degrees")));
    }
    Ok(p.poly_digits())
}

fn table_class(p: &LaurentPoly, n: i64, k: u32) -> Result<Classified> {
    let digits = polynomial_digits(p)?;
    if !is_reduced_poly(p, n, k) {
        return Err(Error::NotReduced { poly: p.to_string(), n });
    }
    let Some(m) = digits.len().checked_sub(1) else {
        let ty = if n <= 0 { NType::Initial } else { NType::Interior };
        let class = (n > 0).then_some(ClassTag::SZero);
        return Ok(Classified { ty, class });
    };
    let regime = Regime::of(m as i64, n);
    let state = digits.iter().rev().fold(ClassState::start(regime), |s, &c| s.step(c, k));
    state.output().ok_or_else(|| Error::Unclassified(format!("{p} at n = {n}")))
}

/// Type and class of an n-reduced polynomial with non-negative leading coefficient.
pub fn classify(p: &LaurentPoly, n: i64, k: u32) -> Result<Classified> {
    if p.leading_coeff() < 0 {
        return Err(Error::NegativeLeading(p.to_string()));
    }
    table_class(p, n, k)
}

/// The same table extended to negative leading coefficients (negative constants are S-).
pub fn classify_generalized(p: &LaurentPoly, n: i64, k: u32) -> Result<Classified> {
    table_class(p, n, k)
}

/// Class in signed notation: a negative leading coefficient reports the class of -P, negated.
pub fn classify_signed(p: &LaurentPoly, n: i64, k: u32) -> Result<(NType, Option<NClass>)> {
    let negated = p.leading_coeff() < 0;
    let c = if negated { classify(&p.neg(), n, k)? } else { classify(p, n, k)? };
    Ok((c.ty, c.class.map(|tag| NClass { tag, negated })))
}

fn rewrite_plus_one(params: &GroupParams, p: &LaurentPoly, n: i64) -> Result<LaurentPoly> {
    let q = reduce_polynomial_part(params, &p.add_scaled(&LaurentPoly::constant(1), 1), n, 0)?.result;
    let residual = q.coeff(-1);
    if q.min_degree().is_some_and(|d| d < -1) || !(residual == 0 || residual == 1) {
        return Err(Error::Successor(format!("rewriting of {p} + 1 at n = {n} left {q}")));
    }
    Ok(q)
}

fn subtract(q: LaurentPoly, one: i64, x_inv: i64) -> Result<LaurentPoly> {
    let mut s = q;
    s.add_term(0, -one);
    s.add_term(-1, -x_inv);
    if s.min_degree().is_some_and(|d| d < 0) {
        return Err(Error::Successor(format!("{s} is not a polynomial")));
    }
    Ok(s)
}

fn successor_by_class(params: &GroupParams, p: &LaurentPoly, n: i64, c: Classified) -> Result<LaurentPoly> {
    let k = params.k() as i64;
    match c.ty {
        NType::Initial | NType::Interior | NType::Negative => Ok(p.add_scaled(&LaurentPoly::constant(1), 1)),
        NType::BoundaryS => subtract(rewrite_plus_one(params, p, n)?, 0, 0),
        NType::BoundaryP => {
            if p.max_degree() == Some(0) {
                let c0 = p.coeff(0);
                if n <= 0 && c0 == k + 2 {
                    return Ok(LaurentPoly::from_poly(&[-k + 1, 1]));
                }
                if n > 0 && c0 == k + 1 {
                    return Ok(LaurentPoly::from_poly(&[-k, 1]));
                }
            }
            let q = rewrite_plus_one(params, p, n)?;
            match c.class {
                Some(ClassTag::U2 | ClassTag::Ut5) => subtract(q, 1, 1),
                Some(ClassTag::U1 | ClassTag::Ut4) => subtract(q, 0, 1),
                other => Err(Error::Successor(format!("boundary (P) with class {other:?}"))),
            }
        }
    }
}

/// S(P) for an n-reduced P with non-negative leading coefficient.
pub fn successor(params: &GroupParams, p: &LaurentPoly, n: i64) -> Result<LaurentPoly> {
    let c = classify(p, n, params.k())?;
    successor_by_class(params, p, n, c)
}

/// The generalized successor, defined for either sign of the leading coefficient.
pub fn generalized_successor(params: &GroupParams, p: &LaurentPoly, n: i64) -> Result<LaurentPoly> {
    let k = params.k();
    if p.leading_coeff() >= 0 {
        return successor(params, p, n);
    }
    if p.coeff(0) == 0 {
        let r = p.shift(-1);
        if let Ok(c) = classify(&r.neg(), n - 1, k) {
            if c.class == Some(ClassTag::Ut5) {
                return subtract(rewrite_plus_one(params, p, n)?, 0, 0);
            }
        }
    }
    if let Ok(c) = classify(&p.neg(), n, k) {
        match c.class {
            Some(ClassTag::E2) => return subtract(rewrite_plus_one(params, p, n)?, 0, 1),
            Some(ClassTag::E1) => return subtract(rewrite_plus_one(params, p, n)?, 1, 1),
            _ => {}
        }
    }
    let c = classify_generalized(p, n, k)?;
    successor_by_class(params, p, n, c)
}

/// S^-1(P) = -S~(-P).
pub fn predecessor(params: &GroupParams, p: &LaurentPoly, n: i64) -> Result<LaurentPoly> {
    if p.is_zero() {
        return Err(Error::Successor("0 is not a successor".into()));
    }
    if p.leading_coeff() < 0 {
        return Err(Error::NegativeLeading(p.to_string()));
    }
    Ok(generalized_successor(params, &p.neg(), n)?.neg())
}

/// Successor read off the rewriting alone: P + 1 if reduced, otherwise the rewriting Q of
/// P + 1 with its X^-1 residual removed, taking one more unit off when that stays reduced.
pub fn behavioural_successor(params: &GroupParams, p: &LaurentPoly, n: i64) -> Result<LaurentPoly> {
    let k = params.k();
    let plus = p.add_scaled(&LaurentPoly::constant(1), 1);
    if is_reduced_poly(&plus, n, k) {
        return Ok(plus);
    }
    let q = rewrite_plus_one(params, p, n)?;
    if q.coeff(-1) == 0 {
        return Ok(q);
    }
    let lower = subtract(q.clone(), 1, 1)?;
    if is_reduced_poly(&lower, n, k) {
        Ok(lower)
    } else {
        subtract(q, 0, 1)
    }
}

/// Group-level effect of one successor step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GroupStep {
    #[serde(rename = "+b")]
    PlusB,
    #[serde(rename = "-a")]
    MinusA,
    #[serde(rename = "+b-a")]
    PlusBMinusA,
}

impl GroupStep {
    fn from_delta(d: [i64; 2]) -> Option<Self> {
        match d {
            [0, 1] => Some(GroupStep::PlusB),
            [-1, 0] => Some(GroupStep::MinusA),
            [-1, 1] => Some(GroupStep::PlusBMinusA),
            _ => None,
        }
    }
}

impl fmt::Display for GroupStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupStep::PlusB => "+b",
            GroupStep::MinusA => "-a",
            GroupStep::PlusBMinusA => "+b-a",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuccEffect {
    pub length_delta: i64,
    pub step: GroupStep,
}

/// Length change and group step expected for a successor from this type and class.
pub fn expected_effect(c: Classified) -> Option<SuccEffect> {
    let (length_delta, step) = match (c.ty, c.class) {
        (NType::Initial | NType::Interior, _) => (1, GroupStep::PlusB),
        (NType::Negative, _) => (-1, GroupStep::PlusB),
        (NType::BoundaryS, _) => (0, GroupStep::PlusB),
        (NType::BoundaryP, Some(ClassTag::U2 | ClassTag::Ut5)) => (0, GroupStep::MinusA),
        (NType::BoundaryP, Some(ClassTag::U1 | ClassTag::Ut4)) => (0, GroupStep::PlusBMinusA),
        _ => return None,
    };
    Some(SuccEffect { length_delta, step })
}

fn small(v: &[BigInt; 2]) -> Option<[i64; 2]> {
    Some([i64::try_from(&v[0]).ok()?, i64::try_from(&v[1]).ok()?])
}

/// Observed length change and group step from P to `next`.
pub fn effect_between(params: &GroupParams, p: &LaurentPoly, next: &LaurentPoly, n: i64) -> Result<SuccEffect> {
    let x = evaluate_rep(params, p);
    let y = evaluate_rep(params, next);
    let diff = [&y[0] - &x[0], &y[1] - &x[1]];
    let step = small(&diff)
        .and_then(GroupStep::from_delta)
        .ok_or_else(|| Error::Successor(format!("{p} -> {next} moves by ({}, {})", diff[0], diff[1])))?;
    let length_delta = n_length(next, n).0 as i64 - n_length(p, n).0 as i64;
    Ok(SuccEffect { length_delta, step })
}

pub fn succ_effect(params: &GroupParams, p: &LaurentPoly, n: i64) -> Result<SuccEffect> {
    let s = successor(params, p, n)?;
    effect_between(params, p, &s, n)
}

/// How P + 1 fails to be reduced, judged from its rightmost minimal poison subword.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Behaviour {
    Regular,
    /// c_0 = 0, so adding 1 changes a sign.
    SignChange(RuleId),
    PotentialChange(RuleId),
}

pub fn behaviour(p: &LaurentPoly, n: i64, k: u32) -> Behaviour {
    let plus = p.add_scaled(&LaurentPoly::constant(1), 1);
    match select_poison(&violations_of(&plus, 0, n, k)) {
        None => Behaviour::Regular,
        Some(v) if p.coeff(0) == 0 => Behaviour::SignChange(v.rule),
        Some(v) => Behaviour::PotentialChange(v.rule),
    }
}

/// Whether an observed behaviour is one the classification promises for this class.
pub fn behaviour_matches(c: Classified, b: Behaviour) -> bool {
    use RuleId::*;
    match (c.ty, b) {
        (t, Behaviour::Regular) => t.is_regular(),
        (NType::BoundaryS, Behaviour::SignChange(_)) => true,
        (NType::BoundaryP, Behaviour::PotentialChange(r)) => match c.class {
            Some(ClassTag::U2) => matches!(r, R2 | R6),
            Some(ClassTag::U1) => r == R6,
            Some(ClassTag::Ut5) => matches!(r, R1 | R5),
            Some(ClassTag::Ut4) => r == R5,
            _ => false,
        },
        _ => false,
    }
}

/// Visit every n-reduced polynomial with L_n <= max_length, as ascending digits and length.
///
/// Digits are chosen from the top down and a prefix is abandoned once the reducedness
/// automaton reaches its dead state. The zero polynomial is visited first.
pub fn for_each_reduced(
    k: u32,
    n: i64,
    max_length: u64,
    positive_only: bool,
    mut visit: impl FnMut(&[i64], u64),
) {
    let dfa = RuleAutomaton::new(k);
    let kk = k as i64;
    let max = max_length as i64;
    if n.abs() <= max {
        visit(&[], n.unsigned_abs());
    }
    struct Walk<'a, F> {
        dfa: &'a RuleAutomaton,
        k: i64,
        base: i64,
        desc: Vec<i64>,
        asc: Vec<i64>,
        visit: F,
    }
    impl<F: FnMut(&[i64], u64)> Walk<'_, F> {
        fn go(&mut self, q: u32, left: usize, budget: i64) {
            if left == 0 {
                if self.dfa.accepts(q) {
                    self.asc.clear();
                    self.asc.extend(self.desc.iter().rev());
                    let used: i64 = self.desc.iter().map(|c| c.abs()).sum();
                    (self.visit)(&self.asc, (self.base + used) as u64);
                }
                return;
            }
            let reach = budget.min(self.k + 2);
            for a in 0..=reach {
                for c in if a == 0 { vec![0] } else { vec![a, -a] } {
                    let next = self.dfa.step(q, c);
                    if self.dfa.is_dead(next) {
                        continue;
                    }
                    self.desc.push(c);
                    self.go(next, left - 1, budget - a);
                    self.desc.pop();
                }
            }
        }
    }
    for m in 0..=max {
        let base = (m - n).abs() + m;
        if base + 1 > max {
            if m >= n {
                break;
            }
            continue;
        }
        let start = dfa.start(Regime::of(m, n));
        let mut walk = Walk { dfa: &dfa, k: kk, base, desc: Vec::new(), asc: Vec::new(), visit: &mut visit };
        for top in 1..=(max - base).min(kk + 2) {
            for c in [top, -top] {
                if positive_only && c < 0 {
                    continue;
                }
                let q = dfa.step(start, c);
                if dfa.is_dead(q) {
                    continue;
                }
                walk.desc.push(c);
                walk.go(q, m as usize, max - base - top);
                walk.desc.pop();
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enumerated {
    pub poly: LaurentPoly,
    /// `None` when no classification row matches.
    pub class: Option<Classified>,
    pub length: u64,
}

/// Zero and every n-reduced polynomial with positive leading coefficient and L_n <= max_length,
/// ordered by length, then degree, then digits from the top.
pub fn enumerate_reduced(k: u32, n: i64, max_length: u64) -> Vec<Enumerated> {
    let mut out = Vec::new();
    for_each_reduced(k, n, max_length, true, |digits, length| {
        let poly = LaurentPoly::from_poly(digits);
        let class = classify(&poly, n, k).ok();
        out.push(Enumerated { poly, class, length });
    });
    out.sort_by(|a, b| {
        let key = |e: &Enumerated| (e.length, e.poly.max_degree().map_or(-1, |d| d));
        key(a).cmp(&key(b)).then_with(|| {
            let da: Vec<i64> = a.poly.poly_digits().into_iter().rev().collect();
            let db: Vec<i64> = b.poly.poly_digits().into_iter().rev().collect();
            da.cmp(&db)
        })
    });
    out
}

/// 0, S(0), S(S(0)), ... for `steps` successor applications.
pub fn successor_walk(params: &GroupParams, n: i64, steps: usize) -> Result<Vec<LaurentPoly>> {
    let mut out = vec![LaurentPoly::zero()];
    for _ in 0..steps {
        let next = successor(params, out.last().expect("walk starts at 0"), n)?;
        out.push(next);
    }
    Ok(out)
}

/// CSV rows: index, polynomial, class, type, L_n, x0, x1.
pub fn write_enumeration_csv<W: Write>(params: &GroupParams, rows: &[Enumerated], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Assembly(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "poly", "class", "type", "length", "x0", "x1"]).map_err(io)?;
    for (i, e) in rows.iter().enumerate() {
        let x = evaluate_rep(params, &e.poly);
        let (class, ty) = match e.class {
            Some(c) => (c.class.map_or(String::new(), |t| t.to_string()), c.ty.to_string()),
            None => ("unclassified".to_string(), "unclassified".to_string()),
        };
        w.write_record([
            i.to_string(),
            e.poly.to_string(),
            class,
            ty,
            e.length.to_string(),
            x[0].to_string(),
            x[1].to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Assembly(format!("csv output: {e}")))?;
    Ok(())
}
