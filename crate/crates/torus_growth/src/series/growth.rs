//! Sphere and ball growth series by counting canonical representative pairs.
//!
//! Every element (F, n) with n >= 0 is written F = P + X^-1 Q(X^-1) with P n-reduced and the
//! mirror of Q 0-reduced, and its length is L_n(P) + L_0(mirror Q). Elements with n < 0 are
//! mirror images of those with n > 0. A pair (P, Q) is canonical when no nearby pair
//! (P', Q') for the same element is shorter, or equally long and smaller in a fixed order.
//! Nearby means g(P') - g(P) = w for w in a finite window W.
//!
//! For each P an automaton reading its digits from the top keeps every alternative P' that
//! could still end within W of P, with the least length difference seen so far. The final
//! state yields the profile w -> min (L(P') - L(P)). Canonicity of a pair depends only on the
//! two profiles, so the series is a finite sum of products of profile generating functions.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use serde::Serialize;

use super::modular::{add_mod, berlekamp_massey_mod, crt, fit_rational_multimodular, mul_mod, primes, sub_mod};
use super::poly::{expand_coeffs, PolyT, RationalT};
use crate::error::{Error, Result};
use crate::group_core::{bfs_ball_with, Exec, GroupParams};
use crate::reduction::automaton::{Regime, RuleAutomaton};

const NOT_STARTED: u32 = u32::MAX;

type Vec2 = (i32, i32);

/// Tuning knobs of the pair automaton. Results are checked for stability under enlargement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssemblyParams {
    /// Alternatives may start this many positions above the top of P.
    pub pad: usize,
    /// Alternatives longer than P by more than this are dropped mid-scan.
    pub dl_cap: i32,
    /// Length differences below minus this are clamped mid-scan.
    pub dl_floor: i32,
}

impl AssemblyParams {
    pub fn for_k(k: u32) -> Self {
        AssemblyParams { pad: 2, dl_cap: k as i32 + 4, dl_floor: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Hyp {
    q: u32,
    v: Vec2,
    lex: i8,
    dl: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Macro {
    offset: Offset,
    p: u32,
    /// Remaining pad positions; 0 once the scan is inside P.
    pad_left: u8,
    /// Index of the last digit read below the top of P, capped.
    depth: u8,
    unresolved: bool,
    hyps: Vec<Hyp>,
}

/// Least length differences of alternatives at each nonzero offset in W.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(Vec<(Vec2, i32)>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Dead,
    NotCanonical,
    Unresolved,
    Profile(u32),
}

/// Level of P relative to its degree: `Exact(m - n)` or one of the two clamped tails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Offset {
    Exact(i32),
    Above,
    Below,
    /// The zero polynomial; the scan runs over positions n + pad down to 0.
    Zero,
}

struct Geometry {
    d: i64,
    lam: f64,
    bound: f64,
    window: HashSet<Vec2>,
}

impl Geometry {
    fn new(k: u32) -> Self {
        let d = 2 * k as i64 + 1;
        let df = d as f64;
        let lam = (df + (df * df - 4.0).sqrt()) / 2.0;
        let mu = 1.0 / lam;
        let big_d = 2.0 * (k as f64 + 2.0);
        let (bm, bl) = (big_d * mu / (1.0 - mu), big_d / (1.0 - mu));
        let mut window = HashSet::new();
        let r1 = (bl + bm) as i32 + 2;
        for x1 in -r1..=r1 {
            for x0 in -4 * r1..=4 * r1 {
                let (a, b) = (x0 as f64, x1 as f64);
                if (a + mu * b).abs() <= bm + 1e-9 && (a + lam * b).abs() <= bl + 1e-9 {
                    for w in [(x0, x1), (x1, x0), (-x0, -x1), (-x1, -x0)] {
                        window.insert(w);
                    }
                }
            }
        }
        let bw = window.iter().map(|&(a, b)| (a as f64 + lam * b as f64).abs()).fold(0.0, f64::max);
        let bound = bw + big_d * lam / (lam - 1.0) + 1e-6;
        Geometry { d, lam, bound, window }
    }

    fn step(&self, v: Vec2, c: i64) -> Option<Vec2> {
        let x0 = -(v.1 as i64);
        let x1 = v.0 as i64 + self.d * v.1 as i64 + c;
        if (x0 as f64 + self.lam * x1 as f64).abs() > self.bound {
            return None;
        }
        Some((i32::try_from(x0).ok()?, i32::try_from(x1).ok()?))
    }
}

/// Triples (P state, alternative state, offset) from which some common continuation ends
/// with both automata accepting and the offset in W. The P state `NOT_STARTED` stands for
/// the zero polynomial, which only reads zeros.
struct Viability {
    live: HashSet<(u32, u32, Vec2)>,
    /// included[a][b]: every continuation accepted from state a is accepted from state b.
    included: Vec<Vec<bool>>,
}

fn inclusion(dfa: &RuleAutomaton) -> Vec<Vec<bool>> {
    let n = dfa.num_states();
    let letters: Vec<i64> = dfa.letters().collect();
    // bad[a][b]: some word is accepted from a but not from b.
    let mut bad = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            bad[a][b] = dfa.accepts(a as u32) && !dfa.accepts(b as u32);
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..n {
            for b in 0..n {
                if bad[a][b] {
                    continue;
                }
                if letters.iter().any(|&c| bad[dfa.step(a as u32, c) as usize][dfa.step(b as u32, c) as usize]) {
                    bad[a][b] = true;
                    changed = true;
                }
            }
        }
    }
    bad.into_iter().map(|row| row.into_iter().map(|x| !x).collect()).collect()
}

impl Viability {
    fn new(dfa: &RuleAutomaton, geo: &Geometry) -> Self {
        let letters: Vec<i64> = dfa.letters().collect();
        let n = dfa.num_states() as u32;
        let alt_states: Vec<u32> = (0..n).filter(|&q| !dfa.is_dead(q)).chain([NOT_STARTED]).collect();
        let succ = |p: u32, q: u32, v: Vec2| -> Vec<(u32, u32, Vec2)> {
            let mut out = Vec::new();
            let p_moves: Vec<(u32, i64)> = if p == NOT_STARTED {
                vec![(NOT_STARTED, 0)]
            } else {
                letters.iter().map(|&c| (dfa.step(p, c), c)).filter(|&(p2, _)| !dfa.is_dead(p2)).collect()
            };
            let mut q_moves: Vec<(u32, i64)> = Vec::new();
            if q == NOT_STARTED {
                q_moves.push((NOT_STARTED, 0));
                for r in Regime::ALL {
                    for &c in &letters {
                        if c != 0 {
                            q_moves.push((dfa.step(dfa.start(r), c), c));
                        }
                    }
                }
            } else {
                q_moves.extend(letters.iter().map(|&c| (dfa.step(q, c), c)));
            }
            q_moves.retain(|&(q2, _)| q2 == NOT_STARTED || !dfa.is_dead(q2));
            for &(p2, c) in &p_moves {
                for &(q2, c2) in &q_moves {
                    if let Some(v2) = geo.step(v, c2 - c) {
                        out.push((p2, q2, v2));
                    }
                }
            }
            out
        };
        let mut seen: HashMap<(u32, u32, Vec2), usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut stack = Vec::new();
        // Every offset reachable by bounded digit differences.
        let width = 2 * letters.iter().max().copied().unwrap_or(0);
        let mut region = HashSet::from([(0, 0)]);
        let mut frontier = vec![(0, 0)];
        while let Some(v) = frontier.pop() {
            for dc in -width..=width {
                if let Some(v2) = geo.step(v, dc) {
                    if region.insert(v2) {
                        frontier.push(v2);
                    }
                }
            }
        }
        for p in (0..n).filter(|&p| !dfa.is_dead(p)).chain([NOT_STARTED]) {
            for &q in &alt_states {
                for &v in &region {
                let node = (p, q, v);
                seen.insert(node, nodes.len());
                nodes.push(node);
                stack.push(node);
                }
            }
        }
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        while let Some(node) = stack.pop() {
            let from = seen[&node];
            for next in succ(node.0, node.1, node.2) {
                let to = *seen.entry(next).or_insert_with(|| {
                    nodes.push(next);
                    preds.push(Vec::new());
                    stack.push(next);
                    nodes.len() - 1
                });
                preds[to].push(from);
            }
        }
        let accepting = |p: u32, q: u32| (p == NOT_STARTED || dfa.accepts(p)) && (q == NOT_STARTED || dfa.accepts(q));
        let mut live = vec![false; nodes.len()];
        let mut queue: Vec<usize> = (0..nodes.len())
            .filter(|&i| {
                let (p, q, v) = nodes[i];
                accepting(p, q) && (v == (0, 0) || geo.window.contains(&v))
            })
            .collect();
        for &i in &queue {
            live[i] = true;
        }
        while let Some(i) = queue.pop() {
            for &j in &preds[i] {
                if !live[j] {
                    live[j] = true;
                    queue.push(j);
                }
            }
        }
        Viability { included: inclusion(dfa), live: nodes.into_iter().zip(live).filter(|(_, l)| *l).map(|(n, _)| n).collect() }
    }
}

fn key(w: Vec2) -> (i32, i32) {
    (w.1 - w.0, w.0)
}

/// True when the pair with these profiles (polynomial part, mirrored principal part) is canonical.
pub fn canonical_pair(a: &Profile, b: &Profile) -> bool {
    let lookup: HashMap<Vec2, i32> = b.0.iter().copied().collect();
    for &(w, da) in &a.0 {
        if let Some(&db) = lookup.get(&(-w.1, -w.0)) {
            let s = da + db;
            if s < 0 || (s == 0 && key(w) < (0, 0)) {
                return false;
            }
        }
    }
    true
}

struct Engine {
    dfa: RuleAutomaton,
    geo: Geometry,
    viable: Viability,
    params: AssemblyParams,
    letters: Vec<i64>,
    states: Vec<Macro>,
    index: HashMap<Macro, u32>,
    trans: HashMap<(u32, i64), Option<u32>>,
    outcome: HashMap<u32, Outcome>,
    profiles: Vec<Profile>,
    profile_index: HashMap<Profile, u32>,
}

impl Engine {
    fn new(k: u32, params: AssemblyParams) -> Self {
        let dfa = RuleAutomaton::new(k);
        let letters = dfa.letters().collect();
        let geo = Geometry::new(k);
        let viable = Viability::new(&dfa, &geo);
        Engine {
            dfa,
            geo,
            viable,
            params,
            letters,
            states: Vec::new(),
            index: HashMap::new(),
            trans: HashMap::new(),
            outcome: HashMap::new(),
            profiles: Vec::new(),
            profile_index: HashMap::new(),
        }
    }

    fn intern(&mut self, m: Macro) -> u32 {
        if let Some(&id) = self.index.get(&m) {
            return id;
        }
        let id = self.states.len() as u32;
        self.states.push(m.clone());
        self.index.insert(m, id);
        id
    }

    fn intern_profile(&mut self, p: Profile) -> u32 {
        if let Some(&id) = self.profile_index.get(&p) {
            return id;
        }
        let id = self.profiles.len() as u32;
        self.profiles.push(p.clone());
        self.profile_index.insert(p, id);
        id
    }

    fn initial(&mut self, offset: Offset) -> u32 {
        let pad_left = match offset {
            Offset::Zero => 1,
            _ => self.params.pad as u8,
        };
        self.intern(Macro {
            offset,
            p: NOT_STARTED,
            pad_left,
            depth: 0,
            unresolved: false,
            hyps: vec![Hyp { q: NOT_STARTED, v: (0, 0), lex: 0, dl: 0 }],
        })
    }

    /// Regime and starting length difference of an alternative whose top is e positions
    /// above the top of P. `None` when the clamped offset does not determine them.
    fn start_info(&self, offset: Offset, e: i64) -> Option<(Regime, i32)> {
        let pad = self.params.pad as i64;
        match offset {
            Offset::Exact(rho) => {
                let rho = rho as i64;
                let r = rho + e;
                Some((Regime::of(r, 0), (r.abs() - rho.abs() + e) as i32))
            }
            Offset::Above => (e >= -pad).then(|| (Regime::Gt, 2 * e as i32)),
            Offset::Below => Some((Regime::Lt, 0)),
            // e is the degree of the alternative minus n.
            Offset::Zero => Some((Regime::of(e, 0), (e.abs() + e) as i32)),
        }
    }

    fn regime_of_p(offset: Offset) -> Regime {
        match offset {
            Offset::Exact(rho) => Regime::of(rho as i64, 0),
            Offset::Above => Regime::Gt,
            Offset::Below => Regime::Lt,
            Offset::Zero => Regime::Eq,
        }
    }

    fn step(&mut self, offset: Offset, id: u32, c: i64) -> Option<u32> {
        if let Some(&r) = self.trans.get(&(id, c)) {
            return r;
        }
        let r = self.compute_step(offset, id, c);
        let r = r.map(|m| self.intern(m));
        self.trans.insert((id, c), r);
        r
    }

    fn compute_step(&self, offset: Offset, id: u32, c: i64) -> Option<Macro> {
        let m = &self.states[id as usize];
        let in_pad = m.pad_left > 0;
        let depth_cap = self.params.pad as u8 + 1;
        let (p2, pad2, depth2, e, starts_now);
        if offset == Offset::Zero {
            // pad_left stays 1; depth counts positions read from n + pad downwards.
            p2 = NOT_STARTED;
            pad2 = 1;
            depth2 = (m.depth + 1).min(depth_cap);
            e = self.params.pad as i64 - m.depth as i64;
            starts_now = false;
        } else if in_pad {
            debug_assert_eq!(c, 0);
            p2 = NOT_STARTED;
            pad2 = m.pad_left - 1;
            depth2 = 0;
            e = m.pad_left as i64;
            starts_now = false;
        } else {
            let q = if m.p == NOT_STARTED { self.dfa.start(Self::regime_of_p(offset)) } else { m.p };
            p2 = self.dfa.step(q, c);
            if self.dfa.is_dead(p2) {
                return None;
            }
            pad2 = 0;
            starts_now = m.p == NOT_STARTED;
            depth2 = if starts_now { 0 } else { (m.depth + 1).min(depth_cap) };
            e = -(depth2 as i64);
        }
        // Per (state, offset) only the least (dl, lex) matters: a shorter alternative beats
        // whenever a longer one does, and at equal length lex -1 < 0 < 1 stays ordered.
        let mut best: BTreeMap<(u32, Vec2), (i32, i8)> = BTreeMap::new();
        let mut unresolved = m.unresolved;
        let (cap, floor) = (self.params.dl_cap, -self.params.dl_floor);
        let mut push = |q: u32, v: Vec2, lex: i8, dl: i32| {
            if dl > cap {
                return;
            }
            let dl = dl.max(floor);
            let slot = best.entry((q, v)).or_insert((dl, lex));
            if (dl, lex) < *slot {
                *slot = (dl, lex);
            }
        };
        let ca = c.unsigned_abs() as i32;
        for h in &m.hyps {
            if h.q == NOT_STARTED {
                if let Some(v) = self.geo.step(h.v, -c) {
                    let lex = if starts_now { -1 } else { h.lex };
                    push(NOT_STARTED, v, lex, h.dl - ca);
                }
                let info = self.start_info(offset, e);
                for &c2 in &self.letters {
                    if c2 == 0 {
                        continue;
                    }
                    let Some(v) = self.geo.step(h.v, c2 - c) else { continue };
                    let Some((reg, d0)) = info else {
                        unresolved = true;
                        continue;
                    };
                    let q = self.dfa.step(self.dfa.start(reg), c2);
                    if self.dfa.is_dead(q) {
                        continue;
                    }
                    let lex = if in_pad {
                        1
                    } else if starts_now {
                        (c2 - c).signum() as i8
                    } else {
                        -1
                    };
                    push(q, v, lex, h.dl + d0 + c2.unsigned_abs() as i32 - ca);
                }
            } else {
                for &c2 in &self.letters {
                    let q = self.dfa.step(h.q, c2);
                    if self.dfa.is_dead(q) {
                        continue;
                    }
                    let Some(v) = self.geo.step(h.v, c2 - c) else { continue };
                    let lex = if h.lex == 0 && !in_pad { (c2 - c).signum() as i8 } else { h.lex };
                    push(q, v, lex, h.dl + c2.unsigned_abs() as i32 - ca);
                }
            }
        }
        let scan_p = if offset == Offset::Zero { Some(NOT_STARTED) } else if in_pad { None } else { Some(p2) };
        let hyps = best
            .into_iter()
            .filter(|&((q, v), _)| scan_p.is_none_or(|p| self.viable.live.contains(&(p, q, v))))
            .map(|((q, v), (dl, lex))| Hyp { q, v, lex, dl })
            .collect();
        let hyps = self.drop_dominated(hyps);
        // An alternative equal in value that accepts every continuation of P and is already
        // shorter (or equal and smaller) beats P whatever follows.
        if let Some(p) = scan_p.filter(|&p| p != NOT_STARTED) {
            let doomed = hyps.iter().any(|h| {
                h.v == (0, 0)
                    && h.q != NOT_STARTED
                    && self.viable.included[p as usize][h.q as usize]
                    && (h.dl < 0 || (h.dl == 0 && h.lex < 0))
            });
            if doomed {
                return None;
            }
        }
        Some(Macro { offset, p: p2, pad_left: pad2, depth: depth2, unresolved, hyps })
    }

    /// Removes alternatives that another one at the same offset beats on every continuation.
    fn drop_dominated(&self, hyps: Vec<Hyp>) -> Vec<Hyp> {
        let rank = |l: i8| l;
        let beats = |a: &Hyp, b: &Hyp| {
            a.v == b.v
                && a.q != NOT_STARTED
                && b.q != NOT_STARTED
                && self.viable.included[b.q as usize][a.q as usize]
                && (a.dl, rank(a.lex)) <= (b.dl, rank(b.lex))
        };
        let mut keep = Vec::with_capacity(hyps.len());
        for (i, h) in hyps.iter().enumerate() {
            let dominated = hyps.iter().enumerate().any(|(j, g)| {
                j != i && beats(g, h) && (!beats(h, g) || j < i)
            });
            if !dominated {
                keep.push(*h);
            }
        }
        keep
    }

    /// Profile of P if the scan stops after the current digit (P's constant term).
    fn outcome(&mut self, offset: Offset, id: u32) -> Outcome {
        if let Some(&o) = self.outcome.get(&id) {
            return o;
        }
        let o = self.compute_outcome(offset, id);
        self.outcome.insert(id, o);
        o
    }

    fn compute_outcome(&mut self, offset: Offset, id: u32) -> Outcome {
        let m = &self.states[id as usize];
        let is_zero = offset == Offset::Zero;
        if !is_zero && (m.p == NOT_STARTED || m.pad_left > 0 || !self.dfa.accepts(m.p)) {
            return Outcome::Dead;
        }
        let zero_dl = match offset {
            Offset::Exact(rho) => Some(-rho.abs() - rho),
            Offset::Below | Offset::Zero => Some(0),
            Offset::Above => None,
        };
        let mut unresolved = m.unresolved;
        let mut best: BTreeMap<Vec2, i32> = BTreeMap::new();
        for h in &m.hyps {
            let (dl, lex) = if h.q == NOT_STARTED {
                match zero_dl {
                    Some(z) => (h.dl + z, if is_zero { 0 } else { -1 }),
                    None => {
                        unresolved = true;
                        continue;
                    }
                }
            } else if self.dfa.accepts(h.q) {
                (h.dl, h.lex)
            } else {
                continue;
            };
            if h.v == (0, 0) {
                if dl < 0 || (dl == 0 && lex < 0) {
                    return Outcome::NotCanonical;
                }
            } else if self.geo.window.contains(&h.v) {
                let slot = best.entry(h.v).or_insert(dl);
                if dl < *slot {
                    *slot = dl;
                }
            }
        }
        if unresolved {
            return Outcome::Unresolved;
        }
        Outcome::Profile(self.intern_profile(Profile(best.into_iter().collect())))
    }
}

/// Truncated power series with coefficients modulo a prime.
type Series = Vec<u64>;
/// Exact sphere sizes, the residue vectors used, and their moduli.
type ExactSpheres = (Vec<BigInt>, Vec<Vec<u64>>, Vec<u64>);

fn add_into(dst: &mut Series, src: &Series, shift: i64, p: u64) {
    for (i, &x) in src.iter().enumerate() {
        let e = i as i64 + shift;
        if x == 0 || e < 0 {
            continue;
        }
        if let Some(slot) = dst.get_mut(e as usize) {
            *slot = add_mod(*slot, x, p);
        }
    }
}

/// Weighted digit-string counts grouped by profile.
struct Scan {
    offset: Offset,
    min_digits: usize,
    max_digits: Option<usize>,
    /// Per-digit weight is |c| + extra; the total is shifted by `shift`.
    extra: usize,
    shift: i64,
}

fn run_scan(engine: &mut Engine, scan: &Scan, order: usize, p: u64) -> Result<HashMap<u32, Series>> {
    let mut out: HashMap<u32, Series> = HashMap::new();
    let mut id = engine.initial(scan.offset);
    for _ in 0..engine.params.pad {
        id = engine.step(scan.offset, id, 0).expect("pad steps never die");
    }
    let budget = order as i64 - scan.shift;
    if budget < 0 {
        return Ok(out);
    }
    let budget = budget as usize;
    let len_cap = scan.max_digits.unwrap_or(scan.min_digits).max(scan.min_digits);
    let mut layer: HashMap<(u32, usize), Series> = HashMap::new();
    let mut first = vec![0u64; budget + 1];
    first[0] = 1;
    layer.insert((id, 0), first);
    let letters = engine.letters.clone();
    while !layer.is_empty() {
        let mut next: HashMap<(u32, usize), Series> = HashMap::new();
        let mut keys: Vec<_> = layer.keys().copied().collect();
        keys.sort_unstable();
        for (sid, len) in keys {
            let counts = &layer[&(sid, len)];
            if len >= scan.min_digits.max(1) {
                match engine.outcome(scan.offset, sid) {
                    Outcome::Profile(pid) => {
                        let slot = out.entry(pid).or_insert_with(|| vec![0; order + 1]);
                        add_into(slot, counts, scan.shift, p);
                    }
                    Outcome::Unresolved => {
                        return Err(Error::Assembly(format!(
                            "pair automaton unresolved at offset {:?}; enlarge the pad",
                            scan.offset
                        )));
                    }
                    Outcome::Dead | Outcome::NotCanonical => {}
                }
            }
            if scan.max_digits.is_some_and(|m| len >= m) {
                continue;
            }
            let lowest = counts.iter().position(|&x| x != 0).unwrap_or(usize::MAX);
            for &c in &letters {
                if len == 0 && c == 0 {
                    continue;
                }
                let w = c.unsigned_abs() as usize + scan.extra;
                if lowest.saturating_add(w) > budget {
                    continue;
                }
                let Some(nid) = engine.step(scan.offset, sid, c) else { continue };
                let len2 = if scan.max_digits.is_some() { len + 1 } else { (len + 1).min(len_cap) };
                let slot = next.entry((nid, len2)).or_insert_with(|| vec![0; budget + 1]);
                for i in lowest..=budget - w {
                    let x = counts[i];
                    if x != 0 {
                        slot[i + w] = add_mod(slot[i + w], x, p);
                    }
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

fn prefix_sums(s: &Series, p: u64) -> Series {
    let mut acc = 0u64;
    s.iter()
        .map(|&x| {
            acc = add_mod(acc, x, p);
            acc
        })
        .collect()
}

/// Per-profile generating functions of the two halves of a pair.
struct ProfileSeries {
    /// Level 0: polynomial parts at n = 0 and mirrored principal parts.
    f0: HashMap<u32, Series>,
    /// Polynomial parts summed over n >= 1.
    f1: HashMap<u32, Series>,
}

fn merge(dst: &mut HashMap<u32, Series>, src: HashMap<u32, Series>, order: usize, shift: i64, p: u64) {
    for (pid, s) in src {
        let slot = dst.entry(pid).or_insert_with(|| vec![0; order + 1]);
        add_into(slot, &s, shift, p);
    }
}

/// Counts canonical pairs; the pair automaton is built lazily and shared across orders and primes.
pub struct PairCounter {
    engine: Engine,
}

impl PairCounter {
    pub fn new(k: u32, params: AssemblyParams) -> Self {
        PairCounter { engine: Engine::new(k, params) }
    }

    /// Number of pair-automaton states built so far.
    pub fn num_states(&self) -> usize {
        self.engine.states.len()
    }

    /// Number of distinct profiles seen so far.
    pub fn num_profiles(&self) -> usize {
        self.engine.profiles.len()
    }

    fn profile_series(&mut self, order: usize, p: u64) -> Result<ProfileSeries> {
        let engine = &mut self.engine;
        let pad = engine.params.pad as i32;
        let mut f0: HashMap<u32, Series> = HashMap::new();
        let mut f1: HashMap<u32, Series> = HashMap::new();
        // Level 0: L = 2m + sum |c| = sum (2 + |c|) - 2.
        for rho in 0..=pad {
            let len = rho as usize + 1;
            let scan = Scan { offset: Offset::Exact(rho), min_digits: len, max_digits: Some(len), extra: 2, shift: -2 };
            merge(&mut f0, run_scan(engine, &scan, order, p)?, order, 0, p);
        }
        let scan = Scan { offset: Offset::Above, min_digits: pad as usize + 2, max_digits: None, extra: 2, shift: -2 };
        merge(&mut f0, run_scan(engine, &scan, order, p)?, order, 0, p);
        // Levels n >= 1 with m - n = rho: L = |rho| + m + sum |c| = |rho| - 1 + sum (1 + |c|).
        for rho in -pad..=pad {
            let scan = Scan {
                offset: Offset::Exact(rho),
                min_digits: if rho >= 0 { rho as usize + 2 } else { 1 },
                max_digits: None,
                extra: 1,
                shift: rho.abs() as i64 - 1,
            };
            merge(&mut f1, run_scan(engine, &scan, order, p)?, order, 0, p);
        }
        // m - n >= pad + 1: the sum over n = 1..m-pad-1 of t^(2m - n + sum|c|)
        // is (t^(pad+1) G1 - G2) / (1 - t).
        let above = |extra: usize| Scan {
            offset: Offset::Above,
            min_digits: pad as usize + 3,
            max_digits: None,
            extra,
            shift: -(extra as i64),
        };
        let g1 = run_scan(engine, &above(1), order, p)?;
        let g2 = run_scan(engine, &above(2), order, p)?;
        let mut tail: HashMap<u32, Series> = HashMap::new();
        merge(&mut tail, g1, order, pad as i64 + 1, p);
        for (pid, s) in g2 {
            let slot = tail.entry(pid).or_insert_with(|| vec![0; order + 1]);
            for (x, y) in slot.iter_mut().zip(&s) {
                *x = sub_mod(*x, *y, p);
            }
        }
        for (pid, s) in tail {
            merge(&mut f1, HashMap::from([(pid, prefix_sums(&s, p))]), order, 0, p);
        }
        // m - n <= -pad - 1: the sum over n >= m + pad + 1 of t^(n + sum|c|) is t^(pad+1) G1 / (1 - t).
        let below = Scan { offset: Offset::Below, min_digits: 1, max_digits: None, extra: 1, shift: -1 };
        for (pid, s) in run_scan(engine, &below, order, p)? {
            let mut shifted = vec![0; order + 1];
            add_into(&mut shifted, &s, pad as i64 + 1, p);
            merge(&mut f1, HashMap::from([(pid, prefix_sums(&shifted, p))]), order, 0, p);
        }
        // The zero polynomial at level n has length n.
        for (n, o) in zero_outcomes(engine, order)?.into_iter().enumerate() {
            if let Some(pid) = o {
                let mut s = vec![0u64; order + 1];
                s[n] = 1;
                merge(if n == 0 { &mut f0 } else { &mut f1 }, HashMap::from([(pid, s)]), order, 0, p);
            }
        }
        Ok(ProfileSeries { f0, f1 })
    }

    /// Sphere sizes |S(r)| mod p for r <= order.
    pub fn sphere_mod(&mut self, order: usize, p: u64) -> Result<Vec<u64>> {
        let ps = self.profile_series(order, p)?;
        let profiles = &self.engine.profiles;
        let mut total = vec![0u64; order + 1];
        let zero = vec![0u64; order + 1];
        let mut ids: Vec<u32> = ps.f0.keys().chain(ps.f1.keys()).copied().collect();
        ids.sort_unstable();
        ids.dedup();
        let mut q_ids: Vec<u32> = ps.f0.keys().copied().collect();
        q_ids.sort_unstable();
        for a in ids {
            let mut h = vec![0u64; order + 1];
            for &b in &q_ids {
                if canonical_pair(&profiles[a as usize], &profiles[b as usize]) {
                    for (x, &y) in h.iter_mut().zip(&ps.f0[&b]) {
                        *x = add_mod(*x, y, p);
                    }
                }
            }
            let fa = ps.f0.get(&a).unwrap_or(&zero);
            let fb = ps.f1.get(&a).unwrap_or(&zero);
            for i in 0..=order {
                let x = add_mod(fa[i], mul_mod(2, fb[i], p), p);
                if x == 0 {
                    continue;
                }
                for j in 0..=order - i {
                    total[i + j] = add_mod(total[i + j], mul_mod(x, h[j], p), p);
                }
            }
        }
        Ok(total)
    }

    /// Exact sphere sizes for r <= order from residues modulo successive primes, stopping once
    /// a further prime agrees with the reconstruction so far. `first` may hold the residues
    /// modulo the first prime.
    pub fn sphere_exact(&mut self, order: usize, first: Option<Vec<u64>>) -> Result<ExactSpheres> {
        const MAX_PRIMES: usize = 64;
        let all = primes(MAX_PRIMES);
        let mut residues = vec![match first {
            Some(r) => r,
            None => self.sphere_mod(order, all[0])?,
        }];
        let mut exact: Vec<BigInt> = residues[0].iter().map(|&x| BigInt::from(x)).collect();
        for j in 1..MAX_PRIMES {
            let p = all[j];
            let r = self.sphere_mod(order, p)?;
            let pb = BigInt::from(p);
            let agrees = exact.iter().zip(&r).all(|(x, &y)| (x % &pb) == BigInt::from(y));
            residues.push(r);
            let moduli = &all[..=j];
            if agrees {
                return Ok((exact, residues, moduli.to_vec()));
            }
            exact = (0..=order)
                .map(|i| {
                    let r: Vec<u64> = residues.iter().map(|res| res[i]).collect();
                    crt(&r, moduli)
                })
                .collect();
        }
        Err(Error::Budget { what: "primes for Chinese remaindering", limit: MAX_PRIMES })
    }

    /// Sphere sizes for r <= order.
    pub fn sphere_coefficients(&mut self, order: usize) -> Result<Vec<BigInt>> {
        Ok(self.sphere_exact(order, None)?.0)
    }

    /// Smallest order (doubling from 64) at which the recurrence modulo one prime is determined
    /// with `margin` terms to spare, with the residues at that order.
    pub fn determining_order(&mut self, margin: usize, max_order: usize) -> Result<(usize, Vec<u64>)> {
        let p = primes(1)[0];
        let mut order = 64.min(max_order);
        loop {
            let res = self.sphere_mod(order, p)?;
            let (_, l) = berlekamp_massey_mod(&res, p);
            if 2 * l + margin <= order + 1 {
                return Ok((order, res));
            }
            if order >= max_order {
                return Err(Error::Assembly(format!(
                    "recurrence of order {l} is not determined by {} terms",
                    order + 1
                )));
            }
            order = (order * 2).min(max_order);
        }
    }

    /// The sphere series as a rational function with the order it was fitted at.
    pub fn sphere_series(&mut self, margin: usize, max_order: usize) -> Result<(RationalT, usize)> {
        let (order, first) = self.determining_order(margin, max_order)?;
        let (exact, residues, moduli) = self.sphere_exact(order, Some(first))?;
        Ok((fit_rational_multimodular(&exact, &residues, &moduli, margin)?, order))
    }
}

/// Profiles of the zero polynomial at levels 0..=order. The scan state after j positions
/// does not depend on n, so one scan serves every level.
fn zero_outcomes(engine: &mut Engine, order: usize) -> Result<Vec<Option<u32>>> {
    let mut id = engine.initial(Offset::Zero);
    let mut out = Vec::with_capacity(order + 1);
    for step in 0..=order + engine.params.pad {
        id = engine.step(Offset::Zero, id, 0).expect("zero scan never dies");
        if step >= engine.params.pad {
            out.push(match engine.outcome(Offset::Zero, id) {
                Outcome::Profile(pid) => Some(pid),
                Outcome::NotCanonical => None,
                Outcome::Dead => return Err(Error::Assembly("zero polynomial rejected".into())),
                Outcome::Unresolved => return Err(Error::Assembly("zero polynomial unresolved".into())),
            });
        }
    }
    Ok(out)
}

/// Sphere sizes |S(r)| for r <= order computed from canonical pairs.
pub fn sphere_coefficients(k: u32, params: AssemblyParams, order: usize) -> Result<Vec<BigInt>> {
    PairCounter::new(k, params).sphere_coefficients(order)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesMode {
    Sphere,
    Ball,
}

/// A rational growth series with the radius it was checked against (0 when unchecked).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthSeries {
    pub k: u32,
    pub mode: SeriesMode,
    pub series: RationalT,
    pub verified_radius: u32,
    pub coefficients: Vec<BigInt>,
}

impl GrowthSeries {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "k": self.k,
            "numerator": self.series.numerator,
            "denominator": self.series.denominator,
            "verified_radius": self.verified_radius,
            "coefficients": self.coefficients.iter().map(|c| c.to_string().parse::<serde_json::Number>().map(serde_json::Value::Number).unwrap_or_else(|_| serde_json::Value::String(c.to_string()))).collect::<Vec<_>>(),
        })
        .to_string()
    }
}

/// Knob settings larger than the defaults, used to check that results do not depend on them.
pub fn enlarged(params: AssemblyParams) -> AssemblyParams {
    AssemblyParams { pad: params.pad + 1, dl_cap: params.dl_cap + 2, dl_floor: params.dl_floor + 2 }
}

/// The sphere growth series as a rational function. The coefficients it was fitted to are
/// recomputed modulo a prime with enlarged knobs and must agree.
pub fn sphere_series(k: u32, params: AssemblyParams) -> Result<RationalT> {
    let mut counter = PairCounter::new(k, params);
    let (series, order) = counter.sphere_series(16, 1024)?;
    let p = primes(1)[0];
    let base = counter.sphere_mod(order, p)?;
    let check = PairCounter::new(k, enlarged(params)).sphere_mod(order, p)?;
    if base != check {
        let r = base.iter().zip(&check).position(|(a, b)| a != b).unwrap_or(0);
        return Err(Error::Assembly(format!("pair counts change with enlarged knobs at r = {r}")));
    }
    Ok(series)
}

/// First failing radius of a certification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub radius: u32,
    pub expected: u64,
    pub got: BigInt,
}

/// Compares series coefficients with BFS sphere sizes; returns the first mismatch.
pub fn certify(params: &GroupParams, series: &RationalT, radius: u32, exec: Exec) -> Result<Option<Mismatch>> {
    let ball = bfs_ball_with(params, radius, usize::MAX, exec)?;
    let sizes = ball.ball_sizes();
    let coeffs = expand_coeffs(series, radius as usize)?;
    for r in 0..=radius as usize {
        let expected = sizes[r] - if r == 0 { 0 } else { sizes[r - 1] };
        if coeffs[r] != BigInt::from(expected) {
            return Ok(Some(Mismatch { radius: r as u32, expected, got: coeffs[r].clone() }));
        }
    }
    Ok(None)
}

fn to_mode(sphere: RationalT, mode: SeriesMode) -> Result<RationalT> {
    match mode {
        SeriesMode::Sphere => Ok(sphere),
        SeriesMode::Ball => sphere.mul(&RationalT::new(PolyT::one(), PolyT::from_i64(&[1, -1]))?),
    }
}

/// Sphere or ball series certified against BFS through `verify_to`; `verify_to = 0` skips the check.
pub fn assemble_growth_series(k: u32, verify_to: u32, mode: SeriesMode, exec: Exec) -> Result<GrowthSeries> {
    let params = GroupParams::new(k)?;
    let sphere = sphere_series(k, AssemblyParams::for_k(k))?;
    if verify_to > 0 {
        if let Some(m) = certify(&params, &sphere, verify_to, exec)? {
            return Err(Error::Certification { radius: m.radius as usize, series: m.got.to_string(), bfs: m.expected.to_string() });
        }
    }
    let series = to_mode(sphere, mode)?;
    let coefficients = expand_coeffs(&series, verify_to.max(10) as usize)?;
    Ok(GrowthSeries { k, mode, series, verified_radius: verify_to, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BFS2: [u64; 11] = [1, 6, 22, 70, 206, 542, 1402, 3462, 8474, 20374, 48342];

    #[test]
    fn window_size_k2() {
        assert_eq!(Geometry::new(2).window.len(), 19);
    }

    #[test]
    fn canonical_pair_is_decided_by_sum_and_key() {
        let a = Profile(vec![((1, 0), -1)]);
        let b = Profile(vec![((0, -1), 1)]);
        // Sum 0 with key (w1 - w0, w0) = (-1, 1) < 0: beaten.
        assert!(!canonical_pair(&a, &b));
        let a = Profile(vec![((0, 1), -1)]);
        let b = Profile(vec![((-1, 0), 1)]);
        assert!(canonical_pair(&a, &b));
        let b = Profile(vec![((-1, 0), 0)]);
        assert!(!canonical_pair(&a, &b));
        assert!(canonical_pair(&a, &Profile(vec![])));
    }

    #[test]
    fn ball_mode_accumulates() {
        let sphere = RationalT::new(PolyT::from_i64(&[1, 1]), PolyT::from_i64(&[1, -1])).unwrap();
        let ball = to_mode(sphere, SeriesMode::Ball).unwrap();
        let c: Vec<i64> = expand_coeffs(&ball, 4).unwrap().iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(c, vec![1, 3, 5, 7, 9]);
    }

    #[test]
    fn pair_counts_match_bfs_k2() {
        let c = sphere_coefficients(2, AssemblyParams::for_k(2), 10).unwrap();
        let want: Vec<BigInt> = BFS2.iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(c, want);
        let wider = sphere_coefficients(2, enlarged(AssemblyParams::for_k(2)), 10).unwrap();
        assert_eq!(wider, want);
    }

    #[test]
    fn pair_counts_match_bfs_k3() {
        let c = sphere_coefficients(3, AssemblyParams::for_k(3), 8).unwrap();
        let bfs = bfs_ball_with(&GroupParams::new(3).unwrap(), 8, usize::MAX, Exec::default()).unwrap().ball_sizes();
        let want: Vec<BigInt> = (0..=8).map(|r| BigInt::from(bfs[r] - if r == 0 { 0 } else { bfs[r - 1] })).collect();
        assert_eq!(c, want);
    }
}
