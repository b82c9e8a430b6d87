//! A deterministic automaton recognizing n-reduced polynomials.
//!
//! Words are read from the leading coefficient down to c_0. Which rules apply
//! depends on n only through the sign of m - n, so there is one start state per
//! [`Regime`]. Rule checks that need the coefficient below are carried as
//! pending values and resolved on the next letter, or against 0 at the end.

use std::collections::HashMap;

use super::{pot1, sgn, sign_minus, sign_plus};

/// Sign of m - n for a polynomial of degree m at level n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Lt,
    Eq,
    Gt,
}

impl Regime {
    pub fn of(m: i64, n: i64) -> Regime {
        match m.cmp(&n) {
            std::cmp::Ordering::Less => Regime::Lt,
            std::cmp::Ordering::Equal => Regime::Eq,
            std::cmp::Ordering::Greater => Regime::Gt,
        }
    }

    pub const ALL: [Regime; 3] = [Regime::Lt, Regime::Eq, Regime::Gt];

    fn index(self) -> usize {
        self as usize
    }
}

/// Upper caps on tracked potentials. Larger values behave identically (see tests).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub rule4: i8,
    pub rule5: i8,
    pub rule6: i8,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { rule4: 8, rule5: 2, rule6: 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Scan {
    regime: Regime,
    /// Letters read, capped at 3.
    pos: u8,
    top: i8,
    prev: i8,
    cur: i8,
    /// Rule 3 fires if the next letter has the opposite sign to `cur`.
    r3: bool,
    /// Potential of the live Rule 4 run through `cur`.
    r4: Option<i8>,
    /// Rule 4 potential if `cur` closes the run.
    r4_end: Option<i8>,
    r5: Option<i8>,
    r5_end: Option<i8>,
    /// Minimum of 2 Pot + 2 s1 over open Rule 6 runs through `cur`; they share the sign of `cur`.
    r6: Option<i8>,
    /// Doubled Rule 6 value if `cur` closes a run.
    r6_end: Option<i8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Start(Regime),
    Scan(Scan),
    Dead,
}

struct Builder {
    k: i64,
    caps: Caps,
}

impl Builder {
    fn start(&self, regime: Regime, c: i64) -> Node {
        let k = self.k;
        if c == 0 || c.abs() > k + 2 || (regime == Regime::Lt && c.abs() > k + 1) {
            return Node::Dead;
        }
        let top_rules = regime != Regime::Lt;
        let r5 = (top_rules && (c.abs() == k + 1 || c.abs() == k + 2)).then(|| pot1(c, k) as i8);
        let r6 = (regime == Regime::Lt && (c.abs() == k || c.abs() == k + 1))
            .then(|| self.cap6(2 * pot1(c, k) + 2));
        Node::Scan(Scan {
            regime,
            pos: 1,
            top: c as i8,
            prev: 0,
            cur: c as i8,
            r3: false,
            r4: None,
            r4_end: None,
            r5,
            r5_end: None,
            r6,
            r6_end: None,
        })
    }

    fn cap6(&self, v: i64) -> i8 {
        v.min(self.caps.rule6 as i64) as i8
    }

    /// Resolve every check that waits on the letter below `cur`.
    fn pending_ok(&self, s: &Scan, next: i64) -> bool {
        let k = self.k;
        let (top, prev, cur) = (s.top as i64, s.prev as i64, s.cur as i64);
        if (s.pos > 1 || s.regime == Regime::Lt) && cur != 0 {
            let above = sgn(prev * cur) < 0;
            let below = sgn(cur * next) < 0;
            let bound = match (above, below) {
                (true, true) => k - 1,
                (true, false) | (false, true) => k,
                (false, false) => k + 1,
            };
            if cur.abs() > bound {
                return false;
            }
        }
        if s.pos == 1 && s.regime != Regime::Lt && top.abs() > k + 1 && sgn(top * next) < 0 {
            return false;
        }
        if s.r3 && sgn(cur * next) < 0 {
            return false;
        }
        if let Some(e) = s.r4_end {
            if 2 * (e as i64) < 2 + sign_minus(top * next) {
                return false;
            }
        }
        if let Some(e) = s.r5_end {
            if 2 * (e as i64) < -10 - sign_plus(top * next) {
                return false;
            }
        }
        if let Some(v) = s.r6_end {
            if (v as i64) < -4 - sign_plus(cur * next) {
                return false;
            }
        }
        true
    }

    fn step(&self, node: Node, c: i64) -> Node {
        let s = match node {
            Node::Dead => return Node::Dead,
            Node::Start(r) => return self.start(r, c),
            Node::Scan(s) => s,
        };
        let k = self.k;
        if c.abs() > k + 2 || !self.pending_ok(&s, c) {
            return Node::Dead;
        }
        let top = s.top as i64;
        let sign_top = sgn(top);
        let cur = s.cur as i64;
        let mut t = Scan {
            regime: s.regime,
            pos: (s.pos + 1).min(3),
            top: s.top,
            prev: s.cur,
            cur: c as i8,
            r3: false,
            r4: None,
            r4_end: None,
            r5: None,
            r5_end: None,
            r6: None,
            r6_end: None,
        };

        let leading_one = s.regime == Regime::Gt && top.abs() == 1;
        if s.pos == 1 && leading_one {
            let first = c * sign_top;
            if first == -k {
                return Node::Dead;
            }
            t.r3 = first == -k + 1;
            if first == -k + 1 || first == -k + 2 {
                t.r4 = Some(pot1(c, k) as i8);
            }
        } else if let Some(p) = s.r4 {
            let cs = c * sign_top;
            let total = p as i64 + pot1(c, k);
            if cs == -k || cs == -k - 1 {
                t.r4_end = Some(total as i8);
            }
            if cs == -k + 1 || cs == -k {
                t.r4 = Some(total.min(self.caps.rule4 as i64) as i8);
            }
        }

        if let Some(p) = s.r5 {
            let cs = c * sign_top;
            let total = p as i64 + pot1(c, k);
            if cs == k || cs == k + 1 {
                t.r5_end = Some(total as i8);
            }
            if cs == k - 1 || cs == k {
                t.r5 = Some(total.min(self.caps.rule5 as i64) as i8);
            }
        }

        let mut open = None;
        if let Some(v) = s.r6 {
            let cs = c * sgn(cur);
            let total = v as i64 + 2 * pot1(c, k);
            if cs == k || cs == k + 1 {
                t.r6_end = Some(total as i8);
            }
            if cs == k - 1 || cs == k {
                open = Some(total);
            }
        }
        if c.abs() == k || c.abs() == k + 1 {
            let fresh = 2 * pot1(c, k) + 2 * sign_plus(c * cur);
            open = Some(open.map_or(fresh, |o: i64| o.min(fresh)));
        }
        t.r6 = open.map(|v| self.cap6(v));
        Node::Scan(t)
    }

    fn accepts(&self, node: Node) -> bool {
        match node {
            Node::Scan(s) => self.pending_ok(&s, 0),
            _ => false,
        }
    }
}

/// Minimal complete DFA over the letters -(k+2)..=k+2.
#[derive(Clone, Debug)]
pub struct RuleAutomaton {
    k: u32,
    width: usize,
    trans: Vec<u32>,
    accept: Vec<bool>,
    starts: [u32; 3],
    dead: u32,
}

impl RuleAutomaton {
    pub fn new(k: u32) -> Self {
        RuleAutomaton::with_caps(k, Caps::default())
    }

    pub fn with_caps(k: u32, caps: Caps) -> Self {
        let b = Builder { k: k as i64, caps };
        let kk = k as i64;
        let letters: Vec<i64> = (-(kk + 2)..=kk + 2).collect();
        let width = letters.len();

        let mut ids: HashMap<Node, u32> = HashMap::new();
        let mut nodes: Vec<Node> = Vec::new();
        let mut intern = |n: Node, nodes: &mut Vec<Node>| -> u32 {
            *ids.entry(n).or_insert_with(|| {
                nodes.push(n);
                (nodes.len() - 1) as u32
            })
        };
        let dead = intern(Node::Dead, &mut nodes);
        let starts = Regime::ALL.map(|r| intern(Node::Start(r), &mut nodes));
        let mut trans: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < nodes.len() {
            let node = nodes[i];
            for &c in &letters {
                let next = b.step(node, c);
                let id = intern(next, &mut nodes);
                trans.push(id);
            }
            i += 1;
        }
        let accept: Vec<bool> = nodes.iter().map(|&n| b.accepts(n)).collect();
        let raw = RuleAutomaton { k, width, trans, accept, starts, dead };
        raw.minimized()
    }

    /// Moore partition refinement; start and dead states keep their roles.
    fn minimized(&self) -> RuleAutomaton {
        let n = self.accept.len();
        let mut block: Vec<u32> = self.accept.iter().map(|&a| a as u32).collect();
        let mut count = 0;
        loop {
            let mut sig: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
            let mut next = vec![0u32; n];
            for q in 0..n {
                let row: Vec<u32> =
                    self.trans[q * self.width..(q + 1) * self.width].iter().map(|&t| block[t as usize]).collect();
                let len = sig.len() as u32;
                next[q] = *sig.entry((block[q], row)).or_insert(len);
            }
            let blocks = sig.len();
            block = next;
            if blocks == count {
                break;
            }
            count = blocks;
        }
        let mut trans = vec![0u32; count * self.width];
        let mut accept = vec![false; count];
        for q in 0..n {
            let b = block[q] as usize;
            accept[b] = self.accept[q];
            for a in 0..self.width {
                trans[b * self.width + a] = block[self.trans[q * self.width + a] as usize];
            }
        }
        RuleAutomaton {
            k: self.k,
            width: self.width,
            trans,
            accept,
            starts: self.starts.map(|s| block[s as usize]),
            dead: block[self.dead as usize],
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn num_states(&self) -> usize {
        self.accept.len()
    }

    /// Letters -(k+2)..=k+2.
    pub fn letters(&self) -> impl Iterator<Item = i64> {
        let k = self.k as i64;
        -(k + 2)..=k + 2
    }

    pub fn start(&self, regime: Regime) -> u32 {
        self.starts[regime.index()]
    }

    pub fn dead(&self) -> u32 {
        self.dead
    }

    pub fn is_dead(&self, q: u32) -> bool {
        q == self.dead
    }

    /// Transition on coefficient `c`; out-of-alphabet letters go to the dead state.
    pub fn step(&self, q: u32, c: i64) -> u32 {
        let k = self.k as i64;
        if c.abs() > k + 2 {
            return self.dead;
        }
        self.trans[q as usize * self.width + (c + k + 2) as usize]
    }

    /// Whether the word read so far, ended here with c_{-1} = 0, is reduced.
    pub fn accepts(&self, q: u32) -> bool {
        self.accept[q as usize]
    }

    /// State after reading (c_m, ..., c_j) of an ascending coefficient slice c_j..c_m.
    pub fn run(&self, regime: Regime, descending: impl IntoIterator<Item = i64>) -> u32 {
        descending.into_iter().fold(self.start(regime), |q, c| self.step(q, c))
    }

    /// Reducedness of (c_0, ..., c_m) at level n; trailing zeros in the slice are ignored.
    pub fn is_reduced(&self, coeffs: &[i64], n: i64) -> bool {
        let m = match coeffs.iter().rposition(|&c| c != 0) {
            Some(m) => m,
            None => return true,
        };
        let q = self.run(Regime::of(m as i64, n), coeffs[..=m].iter().rev().copied());
        self.accepts(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::is_reduced;

    fn words(k: i64, len: usize, f: &mut dyn FnMut(&[i64])) {
        let mut w = vec![0i64; len];
        fn rec(i: usize, k: i64, w: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
            if i == w.len() {
                f(w);
                return;
            }
            for c in -(k + 2)..=k + 2 {
                if i + 1 == w.len() && c == 0 {
                    continue;
                }
                w[i] = c;
                rec(i + 1, k, w, f);
            }
        }
        rec(0, k, &mut w, f);
    }

    #[test]
    fn agrees_with_rule_scan() {
        for k in [2u32, 3] {
            let a = RuleAutomaton::new(k);
            let max_len = if k == 2 { 6 } else { 5 };
            for len in 1..=max_len {
                let m = len as i64 - 1;
                words(k as i64, len, &mut |w| {
                    for n in [m - 2, m - 1, m, m + 1, m + 2] {
                        assert_eq!(a.is_reduced(w, n), is_reduced(w, n, k), "k={k} n={n} {w:?}");
                    }
                });
            }
        }
    }

    #[test]
    fn caps_do_not_change_the_language() {
        for k in [2u32, 3, 4] {
            let small = RuleAutomaton::new(k);
            let big = RuleAutomaton::with_caps(k, Caps { rule4: 20, rule5: 12, rule6: 12 });
            assert_eq!(small.num_states(), big.num_states());
            // Product walk: equal acceptance on every reachable pair.
            let mut seen = std::collections::HashSet::new();
            let mut stack: Vec<(u32, u32)> = Regime::ALL.iter().map(|&r| (small.start(r), big.start(r))).collect();
            while let Some((p, q)) = stack.pop() {
                if !seen.insert((p, q)) {
                    continue;
                }
                assert_eq!(small.accepts(p), big.accepts(q));
                for c in small.letters() {
                    stack.push((small.step(p, c), big.step(q, c)));
                }
            }
        }
    }

    #[test]
    fn zero_and_examples() {
        let a = RuleAutomaton::new(2);
        assert!(a.is_reduced(&[], 0));
        assert!(a.is_reduced(&[4], 0));
        assert!(!a.is_reduced(&[4], 1));
        assert!(!a.is_reduced(&[-3, -2, -2, 1], 0));
        assert!(a.is_reduced(&[0, 0, 3, 0, 0], 2));
    }
}
